"""Nominal and aged path delays, critical delays, aging percentage, slack.

Gate delay degradation uses the alpha-power law: a gate driven through a
network whose worst device has shifted by dVth slows by
((vdd - vth0) / (vdd - vth0 - dVth))^alpha. Under single-input switching
every chain gate inverts, so the transition direction at each gate follows
from the path direction by parity.
"""

import json
from dataclasses import dataclass
from importlib import resources

import numpy as np

from . import netlist
from .bti import delta_vth
from .errors import CalibrationError, DegradationOverflowError

RISE = "RISE"
FALL = "FALL"


@dataclass(frozen=True)
class GateDelayModel:
    base_delay: dict  # (kind, fanin) -> delay units
    alpha: float = 1.3
    vdd: float = 0.95
    vth0: float = 0.35

    def __post_init__(self):
        if not 1.0 <= self.alpha <= 2.0:
            raise CalibrationError(f"alpha must be in [1, 2], got {self.alpha}")
        if self.vdd <= self.vth0:
            raise CalibrationError("vdd must exceed vth0")
        for key, d in self.base_delay.items():
            if d <= 0:
                raise CalibrationError(f"base delay for {key} must be positive, got {d}")

    def base(self, kind, fanin):
        try:
            return self.base_delay[(kind, fanin)]
        except KeyError:
            raise CalibrationError(
                f"gate delay model has no entry for {kind} fanin {fanin}") from None

    @property
    def overdrive(self):
        return self.vdd - self.vth0


def load_gate_model(stream):
    if isinstance(stream, str) and "\n" not in stream:
        with open(stream) as f:
            text = f.read()
    elif isinstance(stream, str):
        text = stream
    else:
        text = stream.read()
    header = {}
    delays = {}
    for line_no, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" in line and "," not in line:
            key, _, value = line.partition("=")
            header[key.strip()] = value.strip()
            continue
        parts = [p.strip() for p in line.split(",")]
        if len(parts) != 3:
            raise CalibrationError(f"line {line_no}: expected kind,fanin,base_delay")
        try:
            delays[(parts[0].upper(), int(parts[1]))] = float(parts[2])
        except ValueError:
            raise CalibrationError(f"line {line_no}: bad number in {line!r}") from None
    return GateDelayModel(
        base_delay=delays,
        alpha=float(header.get("alpha", 1.3)),
        vdd=float(header.get("vdd_V", 0.95)),
        vth0=float(header.get("vth0_V", 0.35)),
    )


def default_gate_model():
    text = resources.files("rejuvsim.data").joinpath("gate_delays_default.txt").read_text()
    return load_gate_model(text)


def nominal_delay(design, path, gdm):
    """Sum of intrinsic gate delays along the chain."""
    total = 0.0
    for gid in path.gate_chain:
        gate = design.gate_by_id[gid]
        total += gdm.base(gate.kind, gate.fanin)
    return total


def gate_transitions(path):
    """Output transition (RISE/FALL) of each chain gate for this path.

    The last gate's output transition equals the path direction; every gate
    inverts, so transitions alternate backwards along the chain.
    """
    m = len(path.gate_chain)
    end_rises = path.direction == netlist.ACTIVATION
    out = []
    for i in range(m):
        rises = end_rises if (m - 1 - i) % 2 == 0 else not end_rises
        out.append(RISE if rises else FALL)
    return out


def _gate_eff_shift(gate, rises, stress_duty, bti_model, years):
    network = netlist.PULL_UP if rises else netlist.PULL_DOWN
    eff = 0.0
    for t in gate.transistors:
        if t.network != network:
            continue
        shift = delta_vth(bti_model, t.device, stress_duty[t.tid], years)
        if shift > eff:
            eff = shift
    return eff


def aged_delay(design, path, duty, bti_model, years, gdm):
    """Path delay after `years` of the given stress-duty profile."""
    vov = gdm.overdrive
    total = 0.0
    for gid, transition in zip(path.gate_chain, gate_transitions(path)):
        gate = design.gate_by_id[gid]
        eff = _gate_eff_shift(gate, transition == RISE, duty.stress_duty,
                              bti_model, years)
        if eff >= vov:
            raise DegradationOverflowError(
                f"gate {gid}: threshold shift {eff:.4f} V reaches the "
                f"overdrive {vov:.4f} V")
        total += gdm.base(gate.kind, gate.fanin) * (vov / (vov - eff)) ** gdm.alpha
    return total


def critical_delays(design, paths, duty, bti_model, years, gdm):
    """Per-group (nominal_critical, aged_critical) over all paths."""
    crit = {}
    for p in paths:
        nom = nominal_delay(design, p, gdm)
        aged = aged_delay(design, p, duty, bti_model, years, gdm)
        cn, ca = crit.get(p.group, (0.0, 0.0))
        crit[p.group] = (max(cn, nom), max(ca, aged))
    return crit


def aging_percentage(nominal_critical, aged_critical):
    """Aged critical delay normalized to nominal, as a percent (100 = unaged)."""
    if nominal_critical <= 0:
        raise ValueError(f"nominal critical delay must be positive, got {nominal_critical}")
    return 100.0 * aged_critical / nominal_critical


def slack(budget, setup, aged_critical):
    """Remaining margin; negative means the setup window is violated."""
    return budget - setup - aged_critical


@dataclass(frozen=True)
class PathResult:
    pid: str
    group: int
    output_index: int
    driving_bit: int
    direction: str
    through_inverter: bool
    nominal: float
    aged: float


@dataclass(frozen=True)
class GroupResult:
    group: int
    nominal_critical: float
    aged_critical: float
    aging_percentage: float


@dataclass(frozen=True)
class AgingReport:
    years: float
    paths: tuple
    groups: tuple
    nominal_critical: float
    aged_critical: float
    aging_percentage: float
    slack_remaining: float
    violated: bool


def build_report(design, duty, bti_model, years, gdm, paths=None):
    if paths is None:
        paths = netlist.enumerate_paths(design)
    rows = []
    for p in paths:
        nom = nominal_delay(design, p, gdm)
        aged = aged_delay(design, p, duty, bti_model, years, gdm)
        rows.append(PathResult(p.pid, p.group, p.output_index, p.driving_bit,
                               p.direction, p.through_inverter, nom, aged))
    groups = []
    for g in range(len(design.groups)):
        g_rows = [r for r in rows if r.group == g]
        nom = max(r.nominal for r in g_rows)
        aged = max(r.aged for r in g_rows)
        groups.append(GroupResult(g, nom, aged, aging_percentage(nom, aged)))
    nominal_critical = max(g.nominal_critical for g in groups)
    aged_critical = max(g.aged_critical for g in groups)
    s = slack(design.timing_budget, design.setup_time, aged_critical)
    return AgingReport(
        years=years,
        paths=tuple(rows),
        groups=tuple(groups),
        nominal_critical=nominal_critical,
        aged_critical=aged_critical,
        aging_percentage=aging_percentage(nominal_critical, aged_critical),
        slack_remaining=s,
        violated=s < 0,
    )


def report_to_dict(report):
    return {
        "years": report.years,
        "nominal_critical": round(report.nominal_critical, 9),
        "aged_critical": round(report.aged_critical, 9),
        "aging_percentage": round(report.aging_percentage, 6),
        "slack_remaining": round(report.slack_remaining, 9),
        "violated": report.violated,
        "groups": [
            {
                "group": g.group,
                "nominal_critical": round(g.nominal_critical, 9),
                "aged_critical": round(g.aged_critical, 9),
                "aging_percentage": round(g.aging_percentage, 6),
            }
            for g in report.groups
        ],
        "paths": [
            {
                "path": r.pid,
                "nominal_delay": round(r.nominal, 9),
                "aged_delay": round(r.aged, 9),
            }
            for r in report.paths
        ],
    }


def write_report_json(report, path):
    with open(path, "w") as f:
        json.dump(report_to_dict(report), f, indent=2)
        f.write("\n")


def write_report_csv(report, path):
    with open(path, "w") as f:
        f.write("path,group,output_index,driving_bit,direction,through_inverter,"
                "nominal_delay,aged_delay\n")
        for r in report.paths:
            f.write(f"{r.pid},{r.group},{r.output_index},{r.driving_bit},"
                    f"{r.direction},{int(r.through_inverter)},"
                    f"{r.nominal:.6f},{r.aged:.6f}\n")
        f.write("\ngroup,nominal_critical,aged_critical,aging_percentage\n")
        for g in report.groups:
            f.write(f"{g.group},{g.nominal_critical:.6f},{g.aged_critical:.6f},"
                    f"{g.aging_percentage:.3f}\n")
        f.write(f"overall,{report.nominal_critical:.6f},{report.aged_critical:.6f},"
                f"{report.aging_percentage:.3f}\n")


class GroupDelayEvaluator:
    """Aged per-output critical delays of one group as a function of the
    group's input-value histogram, vectorized over histogram batches.

    Stress duty of every transistor is linear in the histogram, so the whole
    evaluation reduces to a matrix product, two interpolations and segmented
    max/sum reductions. Agrees with aged_delay() to float precision.
    """

    def __init__(self, design, group, gdm, bti_model, years, paths=None):
        self.design = design
        self.group = group
        self.gdm = gdm
        self.bti = bti_model
        self.years = years
        if paths is None:
            paths = netlist.enumerate_paths(design)
        self.paths = [p for p in paths if p.group == group]
        self.n_values = 1 << design.group_size(group)
        self.n_outputs = self.n_values
        tables = netlist.group_truth_tables(design, group)

        rows = []  # stress coefficient vectors, one per (path, gate, transistor)
        row_pmos = []
        gate_row_start = []
        gate_base = []
        path_gate_start = []
        out_path_start = []
        self._nominal = []
        last_output = -1
        for pi, p in enumerate(self.paths):
            if p.output_index != last_output:
                out_path_start.append(pi)
                last_output = p.output_index
            path_gate_start.append(len(gate_base))
            self._nominal.append(nominal_delay(design, p, gdm))
            for gid, transition in zip(p.gate_chain, gate_transitions(p)):
                gate = design.gate_by_id[gid]
                network = netlist.PULL_UP if transition == RISE else netlist.PULL_DOWN
                gate_row_start.append(len(rows))
                gate_base.append(gdm.base(gate.kind, gate.fanin))
                for t in gate.transistors:
                    if t.network != network:
                        continue
                    table = tables[t.gate_net].astype(float)
                    rows.append(table if t.device == netlist.NMOS else 1.0 - table)
                    row_pmos.append(t.device == netlist.PMOS)
        self._S = np.array(rows)  # (n_rows, 2^k)
        self._row_pmos = np.array(row_pmos)
        self._gate_row_start = np.array(gate_row_start)
        self._gate_base = np.array(gate_base)
        self._path_gate_start = np.array(path_gate_start)
        self._out_path_start = np.array(out_path_start)
        self._nominal = np.array(self._nominal)
        self._tscale = (years / bti_model.t_ref_years) ** bti_model.time_exponent

    def nominal_output_criticals(self):
        return np.maximum.reduceat(self._nominal, self._out_path_start)

    def output_criticals(self, hists, years=None):
        """Aged critical delay per output for each histogram row.

        hists: (2^k,) or (m, 2^k), rows summing to 1. Returns (2^k,) or
        (m, 2^k) respectively. `years` overrides the construction-time age.
        """
        h = np.asarray(hists, dtype=float)
        single = h.ndim == 1
        h = np.atleast_2d(h)
        duties = np.clip(h @ self._S.T, 0.0, 1.0)  # (m, n_rows)
        shifts = np.empty_like(duties)
        for device, mask in (("PMOS", self._row_pmos), ("NMOS", ~self._row_pmos)):
            if mask.any():
                x, y = self.bti.curves[device]
                shifts[:, mask] = np.interp(duties[:, mask], x, y)
        if years is None:
            shifts *= self._tscale
        else:
            shifts *= (years / self.bti.t_ref_years) ** self.bti.time_exponent
        vov = self.gdm.overdrive
        if np.any(shifts >= vov):
            raise DegradationOverflowError(
                "threshold shift reaches the overdrive in group evaluation")
        eff = np.maximum.reduceat(shifts, self._gate_row_start, axis=1)
        gate_delays = self._gate_base * (vov / (vov - eff)) ** self.gdm.alpha
        path_delays = np.add.reduceat(gate_delays, self._path_gate_start, axis=1)
        crit = np.maximum.reduceat(path_delays, self._out_path_start, axis=1)
        return crit[0] if single else crit

    def minimax(self, hists, years=None):
        """max over outputs of the aged critical delay, per histogram row."""
        crit = self.output_criticals(hists, years=years)
        return crit.max(axis=-1)
