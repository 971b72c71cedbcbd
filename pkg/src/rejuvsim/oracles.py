"""Brute-force reference computations for verifying the fast paths.

These deliberately take the dumb route: exhaustive enumeration of the
weight simplex instead of the iterative search, and explicit cycle-level
trace interleaving instead of analytic profile mixing.
"""

from itertools import combinations

import numpy as np

from . import netlist, rejuvenation, timing, trace as trace_mod


def simplex_grid(n, step=0.01):
    """All weight vectors of length n on a regular simplex grid.

    Enumerates compositions of round(1/step) into n parts via stars and
    bars; rows sum to 1 exactly up to float division.
    """
    total = int(round(1.0 / step))
    rows = []
    for bars in combinations(range(total + n - 1), n - 1):
        prev = -1
        counts = []
        for b in bars:
            counts.append(b - prev - 1)
            prev = b
        counts.append(total + n - 2 - prev)
        rows.append(counts)
    return np.asarray(rows, dtype=float) / total


def grid_search_weights(design, group, gdm, bti_model, years, step=0.01,
                        chunk=20000):
    """Exhaustive minimax search over the group's weight simplex.

    Returns (best_weights, best_minimax). The reference for the iterative
    design-aware search.
    """
    ev = timing.GroupDelayEvaluator(design, group, gdm, bti_model, years)
    grid = simplex_grid(ev.n_values, step)
    best_val = np.inf
    best_w = None
    for start in range(0, len(grid), chunk):
        block = grid[start:start + chunk]
        vals = ev.minimax(block)
        i = int(np.argmin(vals))
        if vals[i] < best_val:
            best_val = float(vals[i])
            best_w = block[i]
    return best_w, best_val


def lengthened_2to4():
    """The oracle fixture: a 2-to-4 decoder with output 0 lengthened by a
    two-inverter buffer, giving it strictly the longest chains."""
    return netlist.build_decoder(
        family=netlist.NAND_NOR, address_width=2, group_sizes=(2,),
        timing_budget=3.0, setup_time=0.2, output_buffers={(0, 0): 2})


def truncate_trace(trace, cycles):
    """First `cycles` cycles of a trace (hold semantics preserved)."""
    mask = trace.cycles < cycles
    return trace_mod.MemoryTrace(
        cycles=trace.cycles[mask],
        addresses=trace.addresses[mask],
        ops=trace.ops[mask],
        total_cycles=int(cycles),
    )


def mixer_mismatch(functional, plan, design, periods=3):
    """Max per-net |analytic mix - interleaved-trace duty|.

    The functional trace is truncated to exactly `periods` interrupt
    periods so both paths see the same functional cycles.
    """
    n = plan.interrupt_period
    if n > 0:
        if functional.total_cycles < periods * n:
            raise ValueError(
                f"functional trace too short: need {periods * n} cycles")
        functional = truncate_trace(functional, periods * n)
    analytic = rejuvenation.mix(functional, plan, design)
    inter = rejuvenation.interleave_trace(functional, plan, design, periods=periods)
    explicit = trace_mod.duty_profile(inter, design)
    worst = 0.0
    for net, d in analytic.net_duty.items():
        worst = max(worst, abs(d - explicit.net_duty[net]))
    return worst


def histogram_additivity_error(trace, design, split_cycle):
    """|hist(A+B) - weighted(hist(A), hist(B))| with the trace split at
    split_cycle; exact up to float rounding."""
    a = truncate_trace(trace, split_cycle)
    mask = trace.cycles >= split_cycle
    first_b = int(np.searchsorted(trace.cycles, split_cycle, side="left"))
    # address held across the split boundary becomes B's first entry
    b_cycles = trace.cycles[mask] - split_cycle
    b_addrs = trace.addresses[mask]
    b_ops = trace.ops[mask]
    if len(b_cycles) == 0 or b_cycles[0] != 0:
        held = trace.addresses[first_b - 1]
        b_cycles = np.concatenate(([0], b_cycles))
        b_addrs = np.concatenate(([held], b_addrs))
        b_ops = np.concatenate(([trace_mod.IDLE], b_ops))
    b = trace_mod.MemoryTrace(b_cycles, b_addrs, b_ops,
                              trace.total_cycles - split_cycle)
    worst = 0.0
    for g in range(len(design.groups)):
        whole = trace_mod.group_histogram(trace, design, g)
        ha = trace_mod.group_histogram(a, design, g)
        hb = trace_mod.group_histogram(b, design, g)
        merged = (a.total_cycles * ha + b.total_cycles * hb) / trace.total_cycles
        worst = max(worst, float(np.max(np.abs(whole - merged))))
    return worst
