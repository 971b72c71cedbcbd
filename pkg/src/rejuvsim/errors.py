"""Exception types shared across the package.

Each maps to a distinct CLI exit code (see cli.py).
"""


class ConfigError(Exception):
    """Invalid configuration: bad decoder partition, missing file, bad value."""


class TraceParseError(Exception):
    """Malformed trace or spec file. Carries the offending line number."""

    def __init__(self, message, line_no=None):
        if line_no is not None:
            message = f"line {line_no}: {message}"
        super().__init__(message)
        self.line_no = line_no


class CalibrationError(Exception):
    """BTI calibration or gate-delay model file violates its invariants."""


class DegradationOverflowError(Exception):
    """Threshold shift reached the gate overdrive; the device is effectively off."""
