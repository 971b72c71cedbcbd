"""Rejuvenation plan generation, workload mixing, and routine emission.

Three plan kinds: UNIVERSAL sweeps every address evenly; DESIGN_AWARE uses
per-group address weights searched to balance aged path delays under a
rejuvenation-only duty; DESIGN_WORKLOAD_AWARE water-fills rejuvenation mass
against a functional duty profile so the combined duty approaches the
design-aware target. Plans run as a periodic routine of L cycles every N
functional cycles, so the cycle overhead is L/(N+L).
"""

import json
from dataclasses import dataclass, field

import numpy as np

from . import netlist, trace as trace_mod
from .errors import ConfigError
from .timing import GroupDelayEvaluator

UNIVERSAL = "UNIVERSAL"
DESIGN_AWARE = "DESIGN_AWARE"
DESIGN_WORKLOAD_AWARE = "DESIGN_WORKLOAD_AWARE"


@dataclass(frozen=True)
class RejuvenationPlan:
    kind: str
    group_weights: dict  # group -> weight vector over 2^k values, sum 1
    overhead: float  # target fraction of total cycles spent rejuvenating
    routine_length: int  # L
    interrupt_period: int  # N
    schedule: tuple  # ((address, count), ...), counts summing to L
    partial: bool = False  # water-filling could not fully reach the target

    @property
    def achieved_overhead(self):
        if self.routine_length == 0:
            return 0.0
        return self.routine_length / (self.interrupt_period + self.routine_length)

    def flat_weights(self, design):
        """Per-address weights: outer product of the group weight vectors."""
        flat = np.ones(1)
        for g in range(len(design.groups)):  # group 0 holds the LSBs
            flat = np.kron(np.asarray(self.group_weights[g], dtype=float), flat)
        return flat


@dataclass(frozen=True)
class GroupSearchResult:
    weights: np.ndarray
    minimax: float
    spread: float
    iterations: int
    converged: bool
    history: list = field(default_factory=list, repr=False)


@dataclass(frozen=True)
class DesignAwareResult:
    group_weights: dict
    per_group: dict  # group -> GroupSearchResult
    converged: bool


def largest_remainder(weights, total):
    """Integer apportionment of `total` proportional to `weights`."""
    w = np.asarray(weights, dtype=float)
    if total == 0:
        return np.zeros(len(w), dtype=np.int64)
    quota = w / w.sum() * total
    counts = np.floor(quota).astype(np.int64)
    short = total - int(counts.sum())
    if short:
        frac = quota - counts
        order = np.lexsort((np.arange(len(w)), -frac))  # ties -> lowest index
        counts[order[:short]] += 1
    return counts


def _interrupt_period(routine_length, overhead):
    if overhead >= 1.0:
        return 0
    return int(round(routine_length * (1.0 - overhead) / overhead))


def _schedule_from_flat(flat_weights, routine_length):
    counts = largest_remainder(flat_weights, routine_length)
    return tuple((int(a), int(c)) for a, c in enumerate(counts) if c > 0)


def _make_plan(kind, design, group_weights, overhead, routine_length, partial=False):
    if not 0.0 <= overhead <= 1.0:
        raise ConfigError(f"overhead must be in [0, 1], got {overhead}")
    gw = {g: np.asarray(w, dtype=float) for g, w in group_weights.items()}
    for g, w in gw.items():
        if abs(w.sum() - 1.0) > 1e-9 or np.any(w < 0):
            raise ConfigError(f"group {g} weights must be nonnegative and sum to 1")
    if overhead == 0.0:
        return RejuvenationPlan(kind, gw, 0.0, 0, 0, (), partial)
    plan = RejuvenationPlan(kind, gw, float(overhead), int(routine_length),
                            _interrupt_period(routine_length, overhead), (), partial)
    schedule = _schedule_from_flat(plan.flat_weights(design), routine_length)
    return RejuvenationPlan(kind, gw, float(overhead), int(routine_length),
                            plan.interrupt_period, schedule, partial)


def universal_plan(design, overhead, routine_length=None):
    """Equal weight on every address, visited sequentially."""
    if routine_length is None:
        routine_length = design.n_wordlines
    weights = {g: np.full(1 << design.group_size(g), 1.0 / (1 << design.group_size(g)))
               for g in range(len(design.groups))}
    return _make_plan(UNIVERSAL, design, weights, overhead, routine_length)


def plan_from_weights(kind, design, group_weights, overhead, routine_length=None):
    if routine_length is None:
        routine_length = 8 * design.n_wordlines
    return _make_plan(kind, design, group_weights, overhead, routine_length)


def design_aware_weights(design, bti_model, gdm, years=3.0, tol=1e-3,
                         max_iters=400, eta=0.05, collect_history=False):
    """Iterative per-group weight search balancing aged path delays.

    Starts uniform; each iteration shifts an eta fraction of the weight mass
    toward the input value that most relieves the worst aged path (evaluated
    as the shift minimizing the group's worst per-output aged delay), halving
    eta when the step oscillates or stalls. Stops when the spread (max - min)
    of per-output aged critical delays drops to tol, else returns the best
    minimax weights found, flagged as not converged.
    """
    if tol <= 0:
        raise ConfigError(f"tol must be positive, got {tol}")
    per_group = {}
    for g in range(len(design.groups)):
        ev = GroupDelayEvaluator(design, g, gdm, bti_model, years)
        per_group[g] = _search_group(ev, tol, max_iters, eta, collect_history)
    return DesignAwareResult(
        group_weights={g: r.weights for g, r in per_group.items()},
        per_group=per_group,
        converged=all(r.converged for r in per_group.values()),
    )


def _search_group(ev, tol, max_iters, eta, collect_history):
    n = ev.n_values
    w = np.full(n, 1.0 / n)
    crit = ev.output_criticals(w)
    minimax = float(crit.max())
    spread = float(crit.max() - crit.min())
    best_w, best_mm, best_spread = w, minimax, spread
    history = [w.copy()] if collect_history else []
    picks = []
    converged = spread <= tol
    iterations = 0
    eye = np.eye(n)
    while not converged and iterations < max_iters:
        iterations += 1
        cands = (1.0 - eta) * w + eta * eye  # row v shifts mass toward value v
        cand_crit = ev.output_criticals(cands)
        cand_mm = cand_crit.max(axis=1)
        v = int(np.argmin(cand_mm))  # argmin ties resolve to the lowest value
        if cand_mm[v] >= minimax - 1e-15:
            eta /= 2.0  # stalled: no shift improves the worst path
            if eta < 1e-4:
                break
            continue
        if len(picks) >= 2 and v == picks[-2] and v != picks[-1]:
            eta /= 2.0  # oscillating between two relieving values
        picks.append(v)
        w = cands[v]
        crit = cand_crit[v]
        minimax = float(cand_mm[v])
        spread = float(crit.max() - crit.min())
        if collect_history:
            history.append(w.copy())
        if minimax < best_mm:
            best_w, best_mm, best_spread = w, minimax, spread
        if spread <= tol:
            converged = True
    if converged:
        return GroupSearchResult(w, minimax, spread, iterations, True, history)
    return GroupSearchResult(best_w, best_mm, best_spread, iterations, False, history)


def water_fill(target, functional_hist, beta):
    """Rejuvenation histogram bringing (1-beta)*functional + beta*r toward target.

    Exact minimax water-fill on the deficits target - (1-beta)*functional:
    pour the unit of rejuvenation mass onto the largest deficits until level.
    Returns (r, partial); partial when some value is over-utilized beyond
    what zero rejuvenation mass can compensate.
    """
    t = np.asarray(target, dtype=float)
    d = np.asarray(functional_hist, dtype=float)
    levels = t - (1.0 - beta) * d  # sums to beta exactly
    partial = bool(np.any(levels < -1e-12))
    if not partial:
        r = np.clip(levels, 0.0, None) / beta
        return r / r.sum(), partial
    order = np.sort(levels)[::-1]
    prefix = np.cumsum(order)
    mu = 0.0
    for m in range(1, len(order) + 1):
        mu_m = (prefix[m - 1] - beta) / m
        below = order[m] if m < len(order) else -np.inf
        if below <= mu_m <= order[m - 1]:
            mu = mu_m
            break
    r = np.clip(levels - mu, 0.0, None) / beta
    return r / r.sum(), partial


def design_workload_aware_plan(weights, functional_duty, overhead, design,
                               routine_length=None):
    """Water-filled plan combining design-aware weights with a functional duty.

    Over-utilized addresses receive less rejuvenation mass; a group with no
    positive deficit anywhere falls back to uniform mass.
    """
    if overhead <= 0.0:
        raise ConfigError("design & workload aware plan needs overhead > 0")
    if isinstance(weights, DesignAwareResult):
        weights = weights.group_weights
    group_r = {}
    partial = False
    for g in range(len(design.groups)):
        t = np.asarray(weights[g], dtype=float)
        d = np.asarray(functional_duty.group_histograms[g], dtype=float)
        r, p = water_fill(t, d, overhead)
        if not np.any(r > 0):
            r = np.full_like(t, 1.0 / len(t))
        group_r[g] = r
        partial = partial or p
    if routine_length is None:
        routine_length = 8 * design.n_wordlines
    return _make_plan(DESIGN_WORKLOAD_AWARE, design, group_r, overhead,
                      routine_length, partial=partial)


def mix(functional, plan, design):
    """Combined duty profile: (1-beta) functional + beta plan, analytically."""
    if isinstance(functional, trace_mod.MemoryTrace):
        functional = trace_mod.duty_profile(functional, design)
    f = plan.overhead
    hists = {}
    for g in range(len(design.groups)):
        hists[g] = (1.0 - f) * functional.group_histograms[g] + f * plan.group_weights[g]
    return trace_mod.duty_from_histograms(design, hists, functional.observed_cycles)


def schedule_addresses(plan):
    """The routine's address visit sequence, one entry per cycle."""
    if not plan.schedule:
        return np.zeros(0, dtype=np.int64)
    addrs = np.array([a for a, _ in plan.schedule], dtype=np.int64)
    counts = np.array([c for _, c in plan.schedule], dtype=np.int64)
    return np.repeat(addrs, counts)


def interleave_trace(functional, plan, design, periods=None):
    """Explicit interrupt-style mixing: a burst of L rejuvenation cycles after
    every N functional cycles. The independent reference for mix()."""
    percycle = np.repeat(functional.addresses, functional.durations())
    if plan.routine_length == 0:
        return functional
    n, length = plan.interrupt_period, plan.routine_length
    burst = schedule_addresses(plan)
    if periods is None:
        periods = max(1, len(percycle) // n) if n else 1
    func_needed = periods * n
    func_stream = np.resize(percycle, func_needed) if func_needed else percycle[:0]
    chunks = []
    for p in range(periods):
        chunks.append(func_stream[p * n:(p + 1) * n])
        chunks.append(burst)
    stream = np.concatenate(chunks)
    return trace_mod.MemoryTrace(
        cycles=np.arange(len(stream), dtype=np.int64),
        addresses=stream.astype(np.int64),
        ops=np.zeros(len(stream), dtype=np.int8),
        total_cycles=len(stream),
    )


def emit_routine(plan, path=None):
    """Firmware-ready descriptor: the (address, repeat-count) visit schedule
    plus the timer-interrupt period that realizes the target overhead."""
    lines = [
        "# rejuvenation routine descriptor",
        f"kind={plan.kind}",
        f"overhead_target={plan.overhead:.6f}",
        f"overhead_achieved={plan.achieved_overhead:.6f}",
        f"routine_length={plan.routine_length}",
        f"interrupt_period={plan.interrupt_period}",
        "address,count",
    ]
    for a, c in plan.schedule:
        lines.append(f"{a},{c}")
    text = "\n".join(lines) + "\n"
    if path is not None:
        with open(path, "w") as f:
            f.write(text)
    return text


def plan_to_dict(plan):
    return {
        "kind": plan.kind,
        "overhead": plan.overhead,
        "achieved_overhead": plan.achieved_overhead,
        "routine_length": plan.routine_length,
        "interrupt_period": plan.interrupt_period,
        "partial": plan.partial,
        "group_weights": {str(g): [round(float(x), 12) for x in w]
                          for g, w in sorted(plan.group_weights.items())},
        "schedule": [[a, c] for a, c in plan.schedule],
    }


def write_plan_json(plan, path):
    with open(path, "w") as f:
        json.dump(plan_to_dict(plan), f, indent=2)
        f.write("\n")
