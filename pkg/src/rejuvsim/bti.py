"""Duty-factor to threshold-voltage-shift model for NBTI (PMOS) and PBTI (NMOS).

The shift at a reference age comes from a monotone piecewise-linear
calibration curve per device type; other ages scale by (t/t_ref)^n. The
shipped default calibration is a qualitative surrogate (PMOS above NMOS,
steep near full stress); substitute foundry data for absolute numbers.
"""

import io
from dataclasses import dataclass
from importlib import resources

import numpy as np

from .errors import CalibrationError

_HEADER_KEYS = ("t_ref_years", "time_exponent", "temperature_C", "vdd_V", "vth0_V")


@dataclass(frozen=True)
class BtiModel:
    curves: dict  # device -> (duty knots ascending, delta_vth volts at t_ref)
    t_ref_years: float
    time_exponent: float
    temperature_c: float
    vdd: float
    vth0: float

    def __post_init__(self):
        if not 0 < self.time_exponent < 1:
            raise CalibrationError(f"time_exponent must be in (0,1), got {self.time_exponent}")
        if self.vdd <= self.vth0:
            raise CalibrationError("vdd must exceed vth0")
        for device in ("NMOS", "PMOS"):
            if device not in self.curves:
                raise CalibrationError(f"missing calibration curve for {device}")
            x, y = self.curves[device]
            if len(x) < 2:
                raise CalibrationError(f"{device}: need at least two calibration points")
            if x[0] != 0.0 or y[0] != 0.0:
                raise CalibrationError(f"{device}: first calibration point must be (0, 0)")
            if np.any(np.diff(x) <= 0):
                raise CalibrationError(f"{device}: duty factors must be strictly increasing")
            if np.any(np.diff(y) < 0):
                raise CalibrationError(f"{device}: delta_vth must be nondecreasing")
            if x[-1] > 1.0 or np.any(x < 0):
                raise CalibrationError(f"{device}: duty factors must lie in [0, 1]")
            if np.any(y >= self.vdd - self.vth0):
                raise CalibrationError(f"{device}: delta_vth must stay below vdd - vth0")


def delta_vth(model, device, stress_df, years):
    """Threshold shift in volts for a stress duty factor and age in years.

    Accepts scalars or arrays for stress_df. Piecewise-linear in duty,
    power-law (t/t_ref)^n in time.
    """
    df = np.asarray(stress_df, dtype=float)
    if np.any(df < -1e-9) or np.any(df > 1 + 1e-9):
        raise ValueError(f"stress duty factor out of [0,1]: {stress_df}")
    if years <= 0:
        raise ValueError(f"years must be positive, got {years}")
    df = np.clip(df, 0.0, 1.0)
    x, y = model.curves[device]
    shift = np.interp(df, x, y) * (years / model.t_ref_years) ** model.time_exponent
    return float(shift) if np.isscalar(stress_df) else shift


def load_calibration(stream):
    """Parse a calibration file: header key=value lines, then [NMOS]/[PMOS]
    sections of duty,delta_vth_mV lines."""
    if isinstance(stream, str):
        stream = io.StringIO(stream)
    header = {}
    sections = {}
    current = None
    for line_no, raw in enumerate(stream, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            current = line[1:-1].strip().upper()
            if current not in ("NMOS", "PMOS"):
                raise CalibrationError(f"line {line_no}: unknown section [{current}]")
            sections[current] = []
            continue
        if current is None:
            if "=" not in line:
                raise CalibrationError(f"line {line_no}: expected key=value, got {line!r}")
            key, _, value = line.partition("=")
            header[key.strip()] = value.strip()
            continue
        parts = line.split(",")
        if len(parts) != 2:
            raise CalibrationError(f"line {line_no}: expected duty,delta_vth_mV")
        try:
            sections[current].append((float(parts[0]), float(parts[1]) * 1e-3))
        except ValueError:
            raise CalibrationError(f"line {line_no}: bad number in {line!r}") from None
    curves = {}
    for device, pts in sections.items():
        pts = list(pts)
        x = np.array([p[0] for p in pts], dtype=float)
        y = np.array([p[1] for p in pts], dtype=float)
        curves[device] = (x, y)
    try:
        return BtiModel(
            curves=curves,
            t_ref_years=float(header.get("t_ref_years", 3.0)),
            time_exponent=float(header.get("time_exponent", DEFAULT_TIME_EXPONENT)),
            temperature_c=float(header.get("temperature_C", 125.0)),
            vdd=float(header.get("vdd_V", 0.95)),
            vth0=float(header.get("vth0_V", 0.35)),
        )
    except ValueError as e:
        raise CalibrationError(f"bad header value: {e}") from None


def default_model():
    text = resources.files("rejuvsim.data").joinpath("calibration_default.txt").read_text()
    return load_calibration(text)


def zero_model(template=None):
    """A calibration with no shift at any duty; ages nothing by construction."""
    base = template or default_model()
    flat = (np.array([0.0, 1.0]), np.array([0.0, 0.0]))
    return BtiModel(
        curves={"NMOS": flat, "PMOS": flat},
        t_ref_years=base.t_ref_years,
        time_exponent=base.time_exponent,
        temperature_c=base.temperature_c,
        vdd=base.vdd,
        vth0=base.vth0,
    )


def fit_power_law(times, values):
    """Least-squares fit of values ~ A * times^n in log-log space.

    Returns (A, n). Used to derive the default time exponent from a
    multi-year aging series.
    """
    t = np.asarray(times, dtype=float)
    v = np.asarray(values, dtype=float)
    if len(t) != len(v) or len(t) < 2:
        raise ValueError("need at least two (time, value) samples")
    if np.any(t <= 0) or np.any(v <= 0):
        raise ValueError("power-law fit needs positive samples")
    x = np.log(t)
    y = np.log(v)
    xm = x.mean()
    ym = y.mean()
    n = float(((x - xm) * (y - ym)).sum() / ((x - xm) ** 2).sum())
    a = float(np.exp(ym - n * xm))
    return a, n


def fit_time_exponent(times, values):
    return fit_power_law(times, values)[1]


def reference_aging_series():
    """Ten-year no-rejuvenation aging-increase series (percent over nominal)
    used to calibrate the default time exponent."""
    text = resources.files("rejuvsim.data").joinpath("reference_aging_series.csv").read_text()
    years, deltas = [], []
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#") or line.startswith("years"):
            continue
        a, b = line.split(",")
        years.append(float(a))
        deltas.append(float(b))
    return np.array(years), np.array(deltas)


# Fitted to the reference aging series (see fit_time_exponent); frozen to
# three significant figures.
DEFAULT_TIME_EXPONENT = 0.234
