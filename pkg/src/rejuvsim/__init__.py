"""Trace-driven BTI aging simulator and rejuvenation workload generator
for hierarchical memory address pre-decoders."""

from .bti import (BtiModel, default_model, delta_vth, fit_power_law,
                  fit_time_exponent, load_calibration)
from .errors import (CalibrationError, ConfigError, DegradationOverflowError,
                     TraceParseError)
from .netlist import (DecoderDesign, Gate, Path, Transistor, build_decoder,
                      enumerate_paths, evaluate_nets, stress_states)
from .rejuvenation import (RejuvenationPlan, design_aware_weights,
                           design_workload_aware_plan, emit_routine,
                           interleave_trace, mix, universal_plan)
from .timing import (AgingReport, GateDelayModel, GroupDelayEvaluator,
                     aged_delay, aging_percentage, build_report,
                     critical_delays, default_gate_model, load_gate_model,
                     nominal_delay, slack)
from .trace import (DutyProfile, MemoryTrace, WorkloadSpec, duty_profile,
                    group_histogram, parse_trace, synth_workload)

__version__ = "0.1.0"
