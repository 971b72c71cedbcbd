"""End-to-end experiment orchestration: the assessment flow plus the
strategy-comparison, overhead-sweep, and lifetime-sweep experiments.

All experiments reduce to: derive group histograms from a workload, mix in
a rejuvenation plan, evaluate aged critical delays through the per-group
evaluators, and normalize to the aging percentage.
"""

from dataclasses import dataclass

import numpy as np

from . import rejuvenation, timing, trace as trace_mod

STRATEGIES = ("no_rej", "universal", "design_aware", "design_workload_aware", "min")

OVERHEAD_RATIOS = (0.0, 0.05, 0.10, 0.20, 0.40, 0.80, 1.60)


@dataclass(frozen=True)
class ModelContext:
    bti: object
    gdm: object
    years: float = 3.0
    tol: float = 1e-3
    max_iters: int = 400


@dataclass
class DesignPoint:
    """One decoder design with cached evaluators and design-aware weights."""

    name: str
    design: object
    ctx: ModelContext

    def __post_init__(self):
        self.evaluators = [
            timing.GroupDelayEvaluator(self.design, g, self.ctx.gdm, self.ctx.bti,
                                       self.ctx.years)
            for g in range(len(self.design.groups))
        ]
        self.nominal_critical = max(float(ev.nominal_output_criticals().max())
                                    for ev in self.evaluators)
        self._weights = None

    @property
    def design_aware(self):
        if self._weights is None:
            self._weights = rejuvenation.design_aware_weights(
                self.design, self.ctx.bti, self.ctx.gdm, years=self.ctx.years,
                tol=self.ctx.tol, max_iters=self.ctx.max_iters)
        return self._weights

    def aging_of_hists(self, hists, years=None):
        """Worst-group aging percentage for per-group histograms."""
        aged = max(float(ev.minimax(hists[g], years=years))
                   for g, ev in enumerate(self.evaluators))
        return timing.aging_percentage(self.nominal_critical, aged)

    def aging_of_mix(self, functional_hists, plan, years=None):
        hists = {}
        f = plan.overhead
        for g in range(len(self.design.groups)):
            hists[g] = (1.0 - f) * functional_hists[g] + f * plan.group_weights[g]
        return self.aging_of_hists(hists, years=years)


def ratio_to_fraction(ratio):
    """Overhead expressed as rejuvenation-to-functional cycle ratio ->
    fraction of total cycles."""
    if ratio < 0:
        raise ValueError(f"overhead ratio must be >= 0, got {ratio}")
    return ratio / (1.0 + ratio)


def strategy_plan(point, strategy, overhead, functional_duty=None):
    """Build the plan a strategy uses at the given overhead fraction."""
    design = point.design
    if strategy == "universal":
        return rejuvenation.universal_plan(design, overhead)
    if strategy == "design_aware":
        return rejuvenation.plan_from_weights(
            rejuvenation.DESIGN_AWARE, design, point.design_aware.group_weights,
            overhead)
    if strategy == "design_workload_aware":
        return rejuvenation.design_workload_aware_plan(
            point.design_aware, functional_duty, overhead, design)
    if strategy == "min":
        return rejuvenation.plan_from_weights(
            rejuvenation.DESIGN_AWARE, design, point.design_aware.group_weights, 1.0)
    raise ValueError(f"unknown strategy {strategy!r}")


def compare_table(points, workloads, overhead):
    """Aging percentage per (design, workload, strategy) plus per-design
    averages and reduction statistics.

    workloads: {name: DutyProfile}. Returns (rows, averages, reductions);
    rows are dicts keyed by strategy name plus design/workload.
    """
    rows = []
    averages = []
    reductions = []
    for point in points:
        per_strategy = {s: [] for s in STRATEGIES}
        for wname, duty in workloads.items():
            hists = duty.group_histograms
            row = {"design": point.name, "workload": wname, "nominal": 100.0}
            row["no_rej"] = point.aging_of_hists(hists)
            for strategy in ("universal", "design_aware", "design_workload_aware"):
                plan = strategy_plan(point, strategy, overhead, functional_duty=duty)
                row[strategy] = point.aging_of_mix(hists, plan)
            row["min"] = point.aging_of_hists(point.design_aware.group_weights)
            for s in STRATEGIES:
                per_strategy[s].append(row[s])
            rows.append(row)
        avg = {"design": point.name, "workload": "avg.", "nominal": 100.0}
        for s in STRATEGIES:
            avg[s] = float(np.mean(per_strategy[s]))
        averages.append(avg)
        for strategy in ("universal", "design_aware", "design_workload_aware"):
            red = [100.0 * (nr - sv) / (nr - 100.0) if nr > 100.0 else 0.0
                   for nr, sv in zip(per_strategy["no_rej"], per_strategy[strategy])]
            reductions.append({
                "design": point.name,
                "strategy": strategy,
                "min_reduction": float(np.min(red)),
                "avg_reduction": float(np.mean(red)),
                "max_reduction": float(np.max(red)),
            })
    return rows, averages, reductions


def overhead_sweep(points, workloads, ratios=OVERHEAD_RATIOS):
    """Average aging vs execution overhead, per design, with the pure
    design-aware minimum appended as the floor."""
    series = {point.name: [] for point in points}
    for ratio in ratios:
        fraction = ratio_to_fraction(ratio)
        for point in points:
            vals = []
            for duty in workloads.values():
                if fraction == 0.0:
                    vals.append(point.aging_of_hists(duty.group_histograms))
                else:
                    plan = rejuvenation.design_workload_aware_plan(
                        point.design_aware, duty, fraction, point.design)
                    vals.append(point.aging_of_mix(duty.group_histograms, plan))
            series[point.name].append(float(np.mean(vals)))
    floors = {point.name: point.aging_of_hists(point.design_aware.group_weights)
              for point in points}
    return list(ratios), series, floors


def years_sweep(points, duty, overhead, years_grid=range(1, 11)):
    """Mitigated (universal plan) vs unmitigated aging over the years grid."""
    years_grid = list(years_grid)
    series = {}
    for point in points:
        plan = rejuvenation.universal_plan(point.design, overhead)
        hists = duty.group_histograms
        series[point.name] = {
            "no_rej": [point.aging_of_hists(hists, years=y) for y in years_grid],
            "mitigated": [point.aging_of_mix(hists, plan, years=y) for y in years_grid],
        }
    return years_grid, series


def lifetime_extension(point, duty, overhead, reference_years, cap=200.0):
    """Years of mitigated operation matching the unmitigated aging at
    reference_years; inf when the mitigated curve never reaches it."""
    plan = rejuvenation.universal_plan(point.design, overhead)
    hists = duty.group_histograms
    target = point.aging_of_hists(hists, years=reference_years)

    def mitigated(y):
        return point.aging_of_mix(hists, plan, years=y)

    if mitigated(cap) < target:
        return float("inf")
    lo, hi = reference_years, cap
    if mitigated(lo) >= target:
        return lo
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if mitigated(mid) >= target:
            hi = mid
        else:
            lo = mid
    return hi


def load_preset_duties(design, names, seed_offset=0):
    """Synthesize the named preset workloads and derive their duty profiles."""
    from importlib import resources

    duties = {}
    for name in names:
        res = resources.files("rejuvsim.data.workloads").joinpath(f"{name}.spec")
        with resources.as_file(res) as p:
            spec = trace_mod.load_workload_spec(p)
        if seed_offset:
            spec = trace_mod.WorkloadSpec(
                name=spec.name, length=spec.length,
                low_region_weight=spec.low_region_weight,
                stack_region_weight=spec.stack_region_weight,
                body_weight=spec.body_weight, seed=spec.seed + seed_offset)
        tr = trace_mod.synth_workload(spec, design)
        duties[name] = trace_mod.duty_profile(tr, design)
    return duties


PRESET_WORKLOADS = ("aescbc", "conv2d", "fdctfst", "fft", "fir", "ipm",
                    "keccak", "sha")


def write_compare_csv(rows, averages, path):
    cols = ("nominal", "min", "design_workload_aware", "design_aware",
            "universal", "no_rej")
    with open(path, "w") as f:
        f.write("design,workload," + ",".join(cols) + "\n")
        by_design = {}
        for row in rows:
            by_design.setdefault(row["design"], []).append(row)
        avg_by_design = {a["design"]: a for a in averages}
        for design, drows in by_design.items():
            for row in drows + [avg_by_design[design]]:
                f.write(f"{row['design']},{row['workload']},"
                        + ",".join(f"{row[c]:.3f}" for c in cols) + "\n")


def write_reductions_csv(reductions, path):
    with open(path, "w") as f:
        f.write("design,strategy,min_reduction,avg_reduction,max_reduction\n")
        for r in reductions:
            f.write(f"{r['design']},{r['strategy']},{r['min_reduction']:.3f},"
                    f"{r['avg_reduction']:.3f},{r['max_reduction']:.3f}\n")


def write_overhead_csv(ratios, series, floors, path):
    names = list(series)
    with open(path, "w") as f:
        f.write("overhead_ratio," + ",".join(names) + "\n")
        for i, ratio in enumerate(ratios):
            f.write(f"{ratio:.2f}," + ",".join(f"{series[n][i]:.3f}" for n in names)
                    + "\n")
        f.write("min," + ",".join(f"{floors[n]:.3f}" for n in names) + "\n")


def write_years_csv(years_grid, series, path):
    names = list(series)
    with open(path, "w") as f:
        header = ["years"]
        for n in names:
            header += [f"{n}_no_rej", f"{n}_mitigated"]
        f.write(",".join(header) + "\n")
        for i, y in enumerate(years_grid):
            cells = [str(y)]
            for n in names:
                cells.append(f"{series[n]['no_rej'][i]:.3f}")
                cells.append(f"{series[n]['mitigated'][i]:.3f}")
            f.write(",".join(cells) + "\n")


def write_extension_csv(factors, path):
    with open(path, "w") as f:
        f.write("design,reference_years,matched_years,extension_factor\n")
        for row in factors:
            my = row["matched_years"]
            fac = row["extension_factor"]
            my_s = "inf" if my == float("inf") else f"{my:.3f}"
            fac_s = "inf" if fac == float("inf") else f"{fac:.3f}"
            f.write(f"{row['design']},{row['reference_years']},{my_s},{fac_s}\n")
