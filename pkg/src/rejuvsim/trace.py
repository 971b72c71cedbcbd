"""Memory trace ingestion, synthetic workload generation, and duty profiles.

Trace format (text, one entry per line): `<cycle>,<address>,<op>` with cycle
decimal, address decimal or 0x-hex, op one of R/W/I; `#` starts a comment.
The address is held between entries and during gaps and IDLE cycles, so a
compact trace fully determines the decoder input for every cycle.
"""

import io
from dataclasses import dataclass

import numpy as np

from . import netlist
from .errors import ConfigError, TraceParseError

READ, WRITE, IDLE = 0, 1, 2
_OP_CODES = {"R": READ, "W": WRITE, "I": IDLE}
_OP_LETTERS = {v: k for k, v in _OP_CODES.items()}


@dataclass(frozen=True)
class MemoryTrace:
    cycles: np.ndarray  # int64, strictly increasing
    addresses: np.ndarray  # int64, IDLE entries already resolved to the held address
    ops: np.ndarray  # int8
    total_cycles: int

    def __post_init__(self):
        if len(self.cycles) == 0:
            raise ConfigError("empty trace")
        if np.any(np.diff(self.cycles) <= 0):
            raise ConfigError("trace cycles must be strictly increasing")
        if self.total_cycles < int(self.cycles[-1]) + 1:
            raise ConfigError("total_cycles must cover the last entry")

    def __len__(self):
        return len(self.cycles)

    def durations(self):
        """Cycles each entry's address is held (gaps are holds)."""
        return np.diff(self.cycles, append=self.total_cycles)

    @property
    def window(self):
        """Cycles covered by entries; before the first entry the decoder
        input is undefined and excluded from duty statistics."""
        return self.total_cycles - int(self.cycles[0])


@dataclass(frozen=True)
class DutyProfile:
    net_duty: dict  # net -> probability of logic 1
    stress_duty: dict  # transistor -> probability of BTI stress
    group_histograms: dict  # group -> probability vector over 2^k values
    observed_cycles: int


@dataclass(frozen=True)
class WorkloadSpec:
    name: str
    length: int
    low_region_weight: float
    stack_region_weight: float
    body_weight: float
    seed: int

    def __post_init__(self):
        w = (self.low_region_weight, self.stack_region_weight, self.body_weight)
        if any(x < 0 for x in w) or sum(w) <= 0:
            raise ConfigError(f"workload {self.name}: weights must be >= 0 with a positive sum")
        if self.length <= 0:
            raise ConfigError(f"workload {self.name}: length must be positive")


def parse_trace(stream):
    """Parse a trace from a string, iterable of lines, or open file."""
    if isinstance(stream, str):
        stream = io.StringIO(stream)
    cycles, addresses, ops = [], [], []
    last_cycle = -1
    last_addr = None
    for line_no, raw in enumerate(stream, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = [f.strip() for f in line.split(",")]
        if len(fields) != 3:
            raise TraceParseError(f"expected <cycle>,<address>,<op>, got {line!r}", line_no)
        try:
            cycle = int(fields[0])
        except ValueError:
            raise TraceParseError(f"bad cycle number {fields[0]!r}", line_no) from None
        try:
            addr = int(fields[1], 0)
        except ValueError:
            raise TraceParseError(f"bad address {fields[1]!r}", line_no) from None
        op = _OP_CODES.get(fields[2].upper())
        if op is None:
            raise TraceParseError(f"bad op {fields[2]!r}, expected R, W or I", line_no)
        if cycle < 0:
            raise TraceParseError(f"negative cycle {cycle}", line_no)
        if addr < 0:
            raise TraceParseError(f"negative address {addr}", line_no)
        if cycle <= last_cycle:
            raise TraceParseError(
                f"non-monotonic cycle {cycle} (previous {last_cycle})", line_no)
        if op == IDLE:
            if last_addr is None:
                raise TraceParseError(
                    "trace must define an address before the first IDLE hold", line_no)
            addr = last_addr  # address field on I lines is ignored; the bus holds
        cycles.append(cycle)
        addresses.append(addr)
        ops.append(op)
        last_cycle = cycle
        last_addr = addr
    if not cycles:
        raise TraceParseError("trace contains no entries")
    return MemoryTrace(
        cycles=np.asarray(cycles, dtype=np.int64),
        addresses=np.asarray(addresses, dtype=np.int64),
        ops=np.asarray(ops, dtype=np.int8),
        total_cycles=cycles[-1] + 1,
    )


def write_trace(trace, path):
    with open(path, "w") as f:
        f.write("# cycle,address,op\n")
        for c, a, o in zip(trace.cycles, trace.addresses, trace.ops):
            f.write(f"{c},{a},{_OP_LETTERS[int(o)]}\n")


def load_workload_spec(path):
    keys = {}
    with open(path) as f:
        for line_no, raw in enumerate(f, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise TraceParseError(f"expected key=value, got {line!r}", line_no)
            key, _, value = line.partition("=")
            keys[key.strip()] = value.strip()
    try:
        return WorkloadSpec(
            name=keys["name"],
            length=int(keys["length"]),
            low_region_weight=float(keys["low_region_weight"]),
            stack_region_weight=float(keys["stack_region_weight"]),
            body_weight=float(keys["body_weight"]),
            seed=int(keys["seed"]),
        )
    except KeyError as e:
        raise ConfigError(f"workload spec {path} missing key {e.args[0]}") from None


def synth_workload(spec, design):
    """Deterministic synthetic trace with a three-region address mixture.

    The low region holds the addresses whose top group decodes to 0 (first
    2^(W-k) addresses), the stack region those decoding to all-ones (the
    last ones), and the body the rest; region weights come from the spec.
    """
    rng = np.random.default_rng(spec.seed)
    w = design.address_width
    k = design.group_size(len(design.groups) - 1)  # most significant group
    region_size = 1 << (w - k)
    n_regions = 1 << k
    low_max = region_size  # addresses [0, region_size)
    stack_min = (n_regions - 1) * region_size

    weights = np.array([spec.low_region_weight, spec.stack_region_weight,
                        spec.body_weight], dtype=float)
    weights = weights / weights.sum()
    region = rng.choice(3, size=spec.length, p=weights)
    addrs = np.empty(spec.length, dtype=np.int64)
    n_low = int(np.count_nonzero(region == 0))
    n_stack = int(np.count_nonzero(region == 1))
    n_body = spec.length - n_low - n_stack
    addrs[region == 0] = rng.integers(0, low_max, size=n_low)
    addrs[region == 1] = rng.integers(stack_min, 1 << w, size=n_stack)
    if n_body:
        if stack_min <= low_max:  # degenerate: fewer than 3 regions, fall back to uniform
            addrs[region == 2] = rng.integers(0, 1 << w, size=n_body)
        else:
            addrs[region == 2] = rng.integers(low_max, stack_min, size=n_body)
    ops = np.where(rng.random(spec.length) < 0.3, WRITE, READ).astype(np.int8)
    return MemoryTrace(
        cycles=np.arange(spec.length, dtype=np.int64),
        addresses=addrs,
        ops=ops,
        total_cycles=spec.length,
    )


def group_histogram(trace, design, group):
    """Time-weighted probability vector over one group's 2^k input values."""
    _check_bound(trace, design)
    k = design.group_size(group)
    start = design.groups[group][0]
    values = (trace.addresses >> start) & ((1 << k) - 1)
    counts = np.bincount(values, weights=trace.durations(), minlength=1 << k)
    return counts / trace.window


def duty_profile(trace, design):
    """Per-net and per-transistor stress probabilities for a trace."""
    hists = {g: group_histogram(trace, design, g) for g in range(len(design.groups))}
    return duty_from_histograms(design, hists, trace.window)


def duty_from_histograms(design, group_histograms, observed_cycles=0):
    """Build a DutyProfile from per-group input-value histograms.

    Net duty is linear in the histogram: duty(net) = sum_v hist[v] * value
    of the net under group input v. Stress duty follows the bias rules
    (PMOS stressed at gate 0, NMOS at gate 1).
    """
    net_duty = {}
    stress_duty = {}
    hists = {}
    for g in range(len(design.groups)):
        hist = np.asarray(group_histograms[g], dtype=float)
        if hist.shape != (1 << design.group_size(g),):
            raise ConfigError(f"group {g} histogram has wrong length {hist.shape}")
        total = hist.sum()
        if not np.isclose(total, 1.0, atol=1e-9):
            raise ConfigError(f"group {g} histogram sums to {total}, expected 1")
        hists[g] = hist
        tables = netlist.group_truth_tables(design, g)
        for net, table in tables.items():
            net_duty[net] = float(table @ hist)
        for gate in design.pre_decoders[g].gates:
            for t in gate.transistors:
                d = net_duty[t.gate_net]
                stress_duty[t.tid] = d if t.device == netlist.NMOS else 1.0 - d
    return DutyProfile(
        net_duty=net_duty,
        stress_duty=stress_duty,
        group_histograms=hists,
        observed_cycles=int(observed_cycles),
    )


def _check_bound(trace, design):
    top = int(trace.addresses.max())
    if top >= design.n_wordlines:
        raise ConfigError(
            f"trace address {top} exceeds the {design.address_width}-bit address space")
