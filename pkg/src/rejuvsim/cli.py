"""Command-line pipeline.

Subcommands: assess, compare, sweep-overhead, sweep-years, oracle,
synth-trace, emit-routine. Report commands write CSV/JSON plus rendered
PNG figures (disable with --no-figures).

Exit codes: 0 ok, 2 configuration error, 3 trace/spec parse error,
4 convergence failure (with --require-convergence), 5 degradation overflow.
"""

import argparse
import json
import sys
from importlib import resources
from pathlib import Path

from . import bti, figures, netlist, oracles, pipeline, rejuvenation, timing
from . import trace as trace_mod
from .errors import (CalibrationError, ConfigError, DegradationOverflowError,
                     TraceParseError)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_PARSE = 3
EXIT_CONVERGENCE = 4
EXIT_OVERFLOW = 5

BUILTIN_DESIGNS = ("nand_nor_9", "and_and_9")


def _load_design(spec):
    """A builtin design name or a path to a key=value design config."""
    name = spec
    if spec in BUILTIN_DESIGNS:
        res = resources.files("rejuvsim.data.designs").joinpath(f"{spec}.txt")
        with resources.as_file(res) as p:
            kwargs = netlist.load_design_config(p)
    else:
        path = Path(spec)
        if not path.exists():
            raise ConfigError(f"design {spec!r} is neither a builtin "
                              f"{BUILTIN_DESIGNS} nor an existing file")
        kwargs = netlist.load_design_config(path)
        name = path.stem
    return name, netlist.build_decoder(**kwargs)


def _load_spec(spec, seed_offset=0):
    """A builtin workload preset name or a path to a spec file."""
    builtin = set(pipeline.PRESET_WORKLOADS) | {"uniform"}
    if spec in builtin:
        res = resources.files("rejuvsim.data.workloads").joinpath(f"{spec}.spec")
        with resources.as_file(res) as p:
            ws = trace_mod.load_workload_spec(p)
    else:
        path = Path(spec)
        if not path.exists():
            raise ConfigError(f"workload spec {spec!r} not found")
        ws = trace_mod.load_workload_spec(path)
    if seed_offset:
        ws = trace_mod.WorkloadSpec(
            name=ws.name, length=ws.length,
            low_region_weight=ws.low_region_weight,
            stack_region_weight=ws.stack_region_weight,
            body_weight=ws.body_weight, seed=ws.seed + seed_offset)
    return ws


def _load_models(args):
    if args.calibration:
        with open(args.calibration) as f:
            model = bti.load_calibration(f.read())
    else:
        model = bti.default_model()
    if args.gate_model:
        gdm = timing.load_gate_model(args.gate_model)
    else:
        gdm = timing.default_gate_model()
    return model, gdm


def _context(args):
    model, gdm = _load_models(args)
    return pipeline.ModelContext(bti=model, gdm=gdm, years=args.years,
                                 tol=args.tol, max_iters=args.max_iters)


def _workload_duties(args, design):
    """Collect {name: DutyProfile} from --workload-spec and --trace flags."""
    duties = {}
    for spec in args.workload_spec or []:
        ws = _load_spec(spec, args.seed)
        tr = trace_mod.synth_workload(ws, design)
        duties[ws.name] = trace_mod.duty_profile(tr, design)
    for tpath in args.trace or []:
        with open(tpath) as f:
            tr = trace_mod.parse_trace(f)
        duties[Path(tpath).stem] = trace_mod.duty_profile(tr, design)
    if not duties:
        for name in pipeline.PRESET_WORKLOADS:
            ws = _load_spec(name, args.seed)
            tr = trace_mod.synth_workload(ws, design)
            duties[name] = trace_mod.duty_profile(tr, design)
    return duties


def _points(args, ctx):
    specs = args.design or list(BUILTIN_DESIGNS)
    points = []
    for spec in specs:
        name, design = _load_design(spec)
        points.append(pipeline.DesignPoint(name, design, ctx))
    return points


def _check_convergence(args, points, used=True):
    if not (used and args.require_convergence):
        return
    bad = [p.name for p in points if not p.design_aware.converged]
    if bad:
        print(f"error: design-aware weight search did not converge for "
              f"{', '.join(bad)} (tol={args.tol})", file=sys.stderr)
        raise SystemExit(EXIT_CONVERGENCE)


def _outdir(args):
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_assess(args):
    ctx = _context(args)
    name, design = _load_design(args.design[0] if args.design else "nand_nor_9")
    point = pipeline.DesignPoint(name, design, ctx)
    duties = _workload_duties(args, design)
    if len(duties) != 1:
        raise ConfigError("assess takes exactly one --trace or --workload-spec")
    wname, duty = next(iter(duties.items()))
    if args.strategy and args.strategy != "no_rej":
        _check_convergence(args, [point],
                           used=args.strategy in ("design_aware",
                                                  "design_workload_aware", "min"))
        plan = pipeline.strategy_plan(point, args.strategy,
                                      pipeline.ratio_to_fraction(args.overhead)
                                      if args.ratio_overhead else args.overhead,
                                      functional_duty=duty)
        duty = rejuvenation.mix(duty, plan, design)
    report = timing.build_report(design, duty, ctx.bti, ctx.years, ctx.gdm)
    out = _outdir(args)
    timing.write_report_json(report, out / f"report_{name}_{wname}.json")
    timing.write_report_csv(report, out / f"report_{name}_{wname}.csv")
    if not args.no_figures:
        figures.assess_figure(report, out / f"report_{name}_{wname}.png")
    print(f"{name} / {wname}: aging {report.aging_percentage:.3f}% "
          f"slack {report.slack_remaining:+.3f} "
          f"({'VIOLATED' if report.violated else 'ok'})")
    return EXIT_OK


def cmd_compare(args):
    ctx = _context(args)
    points = _points(args, ctx)
    _check_convergence(args, points)
    duties = _workload_duties(args, points[0].design)
    rows, averages, reductions = pipeline.compare_table(points, duties,
                                                        args.overhead)
    out = _outdir(args)
    pipeline.write_compare_csv(rows, averages, out / "compare.csv")
    pipeline.write_reductions_csv(reductions, out / "reductions.csv")
    payload = {"overhead": args.overhead, "years": ctx.years,
               "rows": rows, "averages": averages, "reductions": reductions}
    with open(out / "compare.json", "w") as f:
        json.dump(payload, f, indent=2, default=float)
        f.write("\n")
    if not args.no_figures:
        for point in points:
            figures.compare_figure(rows, averages, point.name,
                                   out / f"compare_{point.name}.png")
    for avg in averages:
        print(f"{avg['design']}: avg no-rej {avg['no_rej']:.3f}%  "
              f"universal {avg['universal']:.3f}%  "
              f"design-aware {avg['design_aware']:.3f}%  "
              f"d&w {avg['design_workload_aware']:.3f}%  "
              f"min {avg['min']:.3f}%")
    return EXIT_OK


def cmd_sweep_overhead(args):
    ctx = _context(args)
    points = _points(args, ctx)
    _check_convergence(args, points)
    duties = _workload_duties(args, points[0].design)
    ratios = args.grid or pipeline.OVERHEAD_RATIOS
    ratios, series, floors = pipeline.overhead_sweep(points, duties, ratios)
    out = _outdir(args)
    pipeline.write_overhead_csv(ratios, series, floors, out / "overhead.csv")
    if not args.no_figures:
        figures.overhead_figure(ratios, series, floors, out / "overhead.png")
    for name, vals in series.items():
        print(f"{name}: " + " ".join(f"{v:.2f}" for v in vals)
              + f" (min {floors[name]:.2f})")
    return EXIT_OK


def cmd_sweep_years(args):
    ctx = _context(args)
    points = _points(args, ctx)
    duties = _workload_duties(args, points[0].design)
    if len(duties) != 1:
        raise ConfigError("sweep-years takes exactly one workload")
    duty = next(iter(duties.values()))
    years_grid, series = pipeline.years_sweep(points, duty, args.overhead)
    factors = []
    for point in points:
        for ty in years_grid:
            matched = pipeline.lifetime_extension(point, duty, args.overhead, ty)
            factors.append({
                "design": point.name,
                "reference_years": ty,
                "matched_years": matched,
                "extension_factor": matched / ty,
            })
    out = _outdir(args)
    pipeline.write_years_csv(years_grid, series, out / "years.csv")
    pipeline.write_extension_csv(factors, out / "extension.csv")
    if not args.no_figures:
        figures.years_figure(years_grid, series, out / "years.png")
    for row in factors:
        if row["reference_years"] == 3:
            print(f"{row['design']}: 3y unmitigated aging matched after "
                  f"{row['matched_years']:.2f}y mitigated "
                  f"(extension x{row['extension_factor']:.2f})")
    return EXIT_OK


def cmd_oracle(args):
    ctx = _context(args)
    design = oracles.lengthened_2to4()
    grid_w, grid_val = oracles.grid_search_weights(
        design, 0, ctx.gdm, ctx.bti, ctx.years, step=args.step)
    search = rejuvenation.design_aware_weights(
        design, ctx.bti, ctx.gdm, years=ctx.years, tol=ctx.tol,
        max_iters=ctx.max_iters)
    res = search.per_group[0]
    gap = (res.minimax - grid_val) / grid_val

    name, wide = _load_design("nand_nor_9")
    ws = _load_spec("fir", args.seed)
    tr = trace_mod.synth_workload(ws, wide)
    plan = rejuvenation.universal_plan(wide, 0.01, routine_length=512)
    mismatch = oracles.mixer_mismatch(tr, plan, wide, periods=3)

    additivity = oracles.histogram_additivity_error(tr, wide,
                                                    tr.total_cycles // 3)

    payload = {
        "design_aware": {
            "grid_minimax": grid_val,
            "grid_weights": [round(float(x), 6) for x in grid_w],
            "iterative_minimax": res.minimax,
            "iterative_weights": [round(float(x), 6) for x in res.weights],
            "relative_gap": gap,
            "converged": res.converged,
            "spread": res.spread,
            "tol": ctx.tol,
        },
        "mixer": {"max_net_mismatch": mismatch, "tolerance": 1e-3},
        "histogram_additivity": {"max_error": additivity, "tolerance": 1e-9},
    }
    out = _outdir(args)
    with open(out / "oracle.json", "w") as f:
        json.dump(payload, f, indent=2, default=float)
        f.write("\n")
    ok = gap <= 0.01 and mismatch <= 1e-3 and additivity <= 1e-9
    print(f"design-aware minimax: grid {grid_val:.6f} vs iterative "
          f"{res.minimax:.6f} (gap {100 * gap:.3f}%)")
    print(f"mixer analytic vs interleaved: max net mismatch {mismatch:.2e}")
    print(f"histogram additivity error: {additivity:.2e}")
    print("oracle: PASS" if ok else "oracle: FAIL")
    if not ok:
        raise SystemExit(EXIT_CONVERGENCE)
    return EXIT_OK


def cmd_synth_trace(args):
    name, design = _load_design(args.design[0] if args.design else "nand_nor_9")
    ws = _load_spec(args.workload_spec[0], args.seed)
    tr = trace_mod.synth_workload(ws, design)
    out = Path(args.out)
    if out.is_dir():
        out = out / f"{ws.name}.trace"
    out.parent.mkdir(parents=True, exist_ok=True)
    trace_mod.write_trace(tr, out)
    print(f"wrote {len(tr)} entries ({tr.total_cycles} cycles) to {out}")
    return EXIT_OK


def cmd_emit_routine(args):
    ctx = _context(args)
    name, design = _load_design(args.design[0] if args.design else "nand_nor_9")
    point = pipeline.DesignPoint(name, design, ctx)
    strategy = args.strategy or "universal"
    duty = None
    if strategy == "design_workload_aware":
        duties = _workload_duties(args, design)
        if len(duties) != 1:
            raise ConfigError("design_workload_aware routine needs one workload")
        duty = next(iter(duties.values()))
    _check_convergence(args, [point],
                       used=strategy in ("design_aware", "design_workload_aware",
                                         "min"))
    plan = pipeline.strategy_plan(point, strategy, args.overhead,
                                  functional_duty=duty)
    out = _outdir(args)
    rejuvenation.emit_routine(plan, out / f"routine_{name}_{strategy}.txt")
    rejuvenation.write_plan_json(plan, out / f"plan_{name}_{strategy}.json")
    print(f"routine: {plan.routine_length} cycles every {plan.interrupt_period} "
          f"functional cycles (overhead {plan.achieved_overhead:.4f})")
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(
        prog="rejuvsim",
        description="BTI aging assessment and rejuvenation workload generation "
                    "for memory address pre-decoders")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, strategies=False):
        p.add_argument("--design", action="append",
                       help=f"builtin name {BUILTIN_DESIGNS} or config file "
                            f"(repeatable)")
        p.add_argument("--calibration", help="BTI calibration file")
        p.add_argument("--gate-model", help="gate delay model file")
        p.add_argument("--trace", action="append", help="trace file (repeatable)")
        p.add_argument("--workload-spec", action="append",
                       help="preset name or spec file (repeatable)")
        p.add_argument("--years", type=float, default=3.0)
        p.add_argument("--overhead", type=float, default=0.01,
                       help="rejuvenation overhead as a fraction of total cycles")
        p.add_argument("--seed", type=int, default=0,
                       help="offset added to workload seeds")
        p.add_argument("--tol", type=float, default=1e-3,
                       help="design-aware convergence tolerance (delay units)")
        p.add_argument("--max-iters", type=int, default=400)
        p.add_argument("--out", default="out", help="output directory")
        p.add_argument("--no-figures", action="store_true",
                       help="skip PNG rendering")
        p.add_argument("--require-convergence", action="store_true",
                       help="exit 4 if the weight search does not converge")
        if strategies:
            p.add_argument("--strategy",
                           choices=("no_rej", "universal", "design_aware",
                                    "design_workload_aware", "min"))

    p = sub.add_parser("assess", help="run the aging assessment flow")
    common(p, strategies=True)
    p.add_argument("--ratio-overhead", action="store_true",
                   help="interpret --overhead as a cycle ratio instead of a fraction")
    p.set_defaults(func=cmd_assess)

    p = sub.add_parser("compare", help="strategies x workloads aging table")
    common(p)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("sweep-overhead", help="average aging vs overhead ratio")
    common(p)
    p.add_argument("--grid", type=float, nargs="+",
                   help="overhead ratios (rejuvenation/functional cycles)")
    p.set_defaults(func=cmd_sweep_overhead)

    p = sub.add_parser("sweep-years", help="aging vs years, with and without "
                                           "universal rejuvenation")
    common(p)
    p.set_defaults(func=cmd_sweep_years)

    p = sub.add_parser("oracle", help="brute-force verification report")
    common(p)
    p.add_argument("--step", type=float, default=0.01,
                   help="simplex grid step for the exhaustive search")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("synth-trace", help="write a synthetic workload trace")
    common(p)
    p.set_defaults(func=cmd_synth_trace)

    p = sub.add_parser("emit-routine", help="write a rejuvenation routine "
                                            "descriptor and plan")
    common(p, strategies=True)
    p.set_defaults(func=cmd_emit_routine)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else EXIT_CONFIG
    except (ConfigError, CalibrationError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except TraceParseError as e:
        print(f"parse error: {e}", file=sys.stderr)
        return EXIT_PARSE
    except DegradationOverflowError as e:
        print(f"degradation overflow: {e}", file=sys.stderr)
        return EXIT_OVERFLOW


if __name__ == "__main__":
    sys.exit(main())
