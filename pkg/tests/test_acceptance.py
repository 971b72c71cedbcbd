"""Acceptance suite: one test per criterion, each printing a PASS line.

Run with `pytest tests/test_acceptance.py -v -s` to see the lines.
"""

import numpy as np
import pytest

from rejuvsim import bti, cli, netlist, oracles, pipeline, rejuvenation, timing, trace
from rejuvsim.timing import GateDelayModel


def report(n, text):
    print(f"\nACCEPTANCE {n:02d} PASS — {text}")


@pytest.fixture(scope="module")
def ctx(model, gdm):
    return pipeline.ModelContext(bti=model, gdm=gdm, years=3.0, tol=1e-3,
                                 max_iters=400)


@pytest.fixture(scope="module")
def points(ctx, nand_nor, and_and):
    return [pipeline.DesignPoint("nand_nor_9", nand_nor, ctx),
            pipeline.DesignPoint("and_and_9", and_and, ctx)]


@pytest.fixture(scope="module")
def preset_duties(nand_nor):
    return pipeline.load_preset_duties(nand_nor, pipeline.PRESET_WORKLOADS)


def test_criterion_01_path_enumeration(nand_nor):
    paths = netlist.enumerate_paths(nand_nor)
    assert len(paths) == 144
    for g in range(3):
        acts = sum(1 for p in paths
                   if p.group == g and p.direction == netlist.ACTIVATION)
        deacts = sum(1 for p in paths
                     if p.group == g and p.direction == netlist.DEACTIVATION)
        assert (acts, deacts) == (24, 24)
    report(1, "144 paths total; 24 activation + 24 deactivation per "
              "3-to-8 pre-decoder (exact)")


def test_criterion_02_bti_model_properties(model):
    for device in ("NMOS", "PMOS"):
        for years in (0.5, 3.0, 10.0):
            assert bti.delta_vth(model, device, 0.0, years) == 0.0

    rng = np.random.default_rng(42)
    violations = 0
    for _ in range(1000):
        device = "PMOS" if rng.random() < 0.5 else "NMOS"
        d1, d2 = np.sort(rng.uniform(0, 1, 2))
        y1, y2 = np.sort(rng.uniform(0.1, 20, 2))
        if bti.delta_vth(model, device, d2, y1) < bti.delta_vth(model, device, d1, y1):
            violations += 1
        if d1 > 0 and y2 > y1:
            if not (bti.delta_vth(model, device, d1, y2)
                    > bti.delta_vth(model, device, d1, y1)):
                violations += 1
    assert violations == 0

    for a in (2.0, 5.5, 10.0):
        for df in (0.3, 1.0):
            ratio = (bti.delta_vth(model, "PMOS", df, 2.0 * a)
                     / bti.delta_vth(model, "PMOS", df, 2.0))
            assert abs(ratio - a ** model.time_exponent) <= 1e-12
    report(2, "zero anchor exact; 1000-case monotonicity sweep clean; "
              "time scaling a^n exact to 1e-12")


def test_criterion_03_aged_never_below_nominal(nand_nor, model, gdm):
    rng = np.random.default_rng(7)
    paths = netlist.enumerate_paths(nand_nor)
    nominal = {p.pid: timing.nominal_delay(nand_nor, p, gdm) for p in paths}
    violations = 0
    for _ in range(100):
        hists = {}
        for g in range(3):
            h = rng.random(8)
            hists[g] = h / h.sum()
        duty = trace.duty_from_histograms(nand_nor, hists)
        for p in paths:
            aged = timing.aged_delay(nand_nor, p, duty, model, 3.0, gdm)
            if aged < nominal[p.pid] - 1e-12:
                violations += 1
    assert violations == 0

    zero = bti.zero_model(model)
    hists = {g: np.full(8, 1 / 8) for g in range(3)}
    duty = trace.duty_from_histograms(nand_nor, hists)
    rep = timing.build_report(nand_nor, duty, zero, 3.0, gdm)
    assert rep.aging_percentage == 100.0
    report(3, "aged >= nominal on 100 random duty profiles x 144 paths; "
              "zero-shift calibration gives exactly 100.000%")


def test_criterion_04_design_aware_oracle(model, gdm):
    design = oracles.lengthened_2to4()
    grid_w, grid_val = oracles.grid_search_weights(design, 0, gdm, model, 3.0,
                                                   step=0.01)
    tol = 0.01
    res = rejuvenation.design_aware_weights(design, model, gdm, years=3.0,
                                            tol=tol, max_iters=400)
    r = res.per_group[0]
    gap = (r.minimax - grid_val) / grid_val
    assert gap <= 0.01
    assert r.weights[0] > 0.25  # mass moved toward the lengthened output
    # convergence contract: the converged flag is honest about the spread
    assert r.converged == (r.spread <= tol)

    # non-vacuous convergence on a symmetric fixture (near-identical paths)
    sym = netlist.build_decoder("NAND_NOR", 2, (2,))
    flat_gdm = GateDelayModel({("INV", 1): 1e-6, ("NAND", 2): 1.0})
    sym_res = rejuvenation.design_aware_weights(sym, model, flat_gdm, tol=tol)
    s = sym_res.per_group[0]
    assert s.converged and s.spread <= tol
    assert np.allclose(s.weights, 0.25, atol=1e-9)
    report(4, f"iterative minimax {r.minimax:.6f} within "
              f"{100 * gap:.3f}% of grid optimum {grid_val:.6f} "
              f"(1% allowed); converged spread ≤ tol on the symmetric fixture, "
              f"flagged honestly (spread {r.spread:.3f}) on the lengthened one")


def test_criterion_05_mixing_oracle(nand_nor):
    spec = trace.WorkloadSpec("fir", 200_000, 0.95, 0.01, 0.04, 105)
    tr = trace.synth_workload(spec, nand_nor)
    plan = rejuvenation.universal_plan(nand_nor, 0.01, routine_length=512)
    mismatch = oracles.mixer_mismatch(tr, plan, nand_nor, periods=3)
    assert mismatch <= 1e-3

    duty = trace.duty_profile(tr, nand_nor)
    zero = rejuvenation.universal_plan(nand_nor, 0.0)
    mixed0 = rejuvenation.mix(duty, zero, nand_nor)
    assert all(mixed0.net_duty[n] == v for n, v in duty.net_duty.items())
    one = rejuvenation.universal_plan(nand_nor, 1.0)
    mixed1 = rejuvenation.mix(duty, one, nand_nor)
    uniform = trace.duty_from_histograms(nand_nor,
                                         {g: np.full(8, 1 / 8) for g in range(3)})
    assert all(abs(mixed1.net_duty[n] - v) <= 1e-15
               for n, v in uniform.net_duty.items())
    report(5, f"analytic vs interleaved mixing agree to "
              f"{mismatch:.2e} per net (1e-3 allowed, beta=0.01, L=512); "
              f"beta=0 and beta=1 exact")


def test_criterion_06_strategy_dominance(points, preset_duties):
    rows, averages, _ = pipeline.compare_table(points, preset_duties, 0.01)
    assert len(rows) == 16
    violations = 0
    for r in rows:
        for s in ("universal", "design_aware", "design_workload_aware"):
            if not (r["min"] - 1e-9 <= r[s] <= r["no_rej"] + 1e-9):
                violations += 1
    assert violations == 0
    for a in averages:
        assert a["design_workload_aware"] <= a["universal"] + 1e-12
        assert a["design_workload_aware"] <= a["design_aware"] + 1e-12
    summary = "; ".join(
        f"{a['design']}: D&W {a['design_workload_aware']:.3f} <= "
        f"uni {a['universal']:.3f}, des {a['design_aware']:.3f}, "
        f"no-rej {a['no_rej']:.3f}" for a in averages)
    report(6, f"dominance clean over 8 workloads x 2 designs; {summary}")


def test_criterion_07_overhead_saturation(points, preset_duties):
    ratios, series, floors = pipeline.overhead_sweep(points, preset_duties)
    for name, vals in series.items():
        steps = -np.diff(vals)
        assert np.all(steps > 0), f"{name} series not strictly decreasing"
        assert np.all(steps[0] >= steps[1:]), f"{name} first step not largest"
        assert all(v > floors[name] for v in vals)
    pretty = "; ".join(f"{n}: {vals[0]:.2f} -> {vals[-1]:.2f} "
                       f"(floor {floors[n]:.2f})" for n, vals in series.items())
    report(7, f"overhead series strictly decreasing, first step largest, "
              f"floor respected; {pretty}")


def test_criterion_08_lifetime_extension(points, preset_duties):
    fir = preset_duties["fir"]
    years_grid, series = pipeline.years_sweep(points, fir, 0.01)
    for name, curves in series.items():
        nr, mit = np.array(curves["no_rej"]), np.array(curves["mitigated"])
        assert np.all(mit <= nr + 1e-12)
        assert np.all(np.diff(nr) > 0) and np.all(np.diff(mit) > 0)
        assert np.all(np.diff(nr, 2) < 1e-9) and np.all(np.diff(mit, 2) < 1e-9)
    factors = {}
    for point in points:
        matched = pipeline.lifetime_extension(point, fir, 0.01, 3.0)
        factors[point.name] = matched / 3.0
        assert factors[point.name] > 1.0
    pretty = "; ".join(f"{n}: x{f:.2f}" for n, f in factors.items())
    report(8, f"mitigated <= unmitigated on 1..10y, both monotone and "
              f"concave; lifetime extension at 3y: {pretty}")


def test_criterion_09_compare_determinism(tmp_path):
    args = ["compare", "--seed", "0"]
    a, b = tmp_path / "a", tmp_path / "b"
    assert cli.main(args + ["--out", str(a)]) == 0
    assert cli.main(args + ["--out", str(b)]) == 0
    compared = []
    for name in ("compare.csv", "compare.json", "reductions.csv"):
        assert (a / name).read_bytes() == (b / name).read_bytes()
        compared.append(name)
    report(9, f"two compare runs byte-identical: {', '.join(compared)}")


def test_criterion_10_time_exponent_fit(model):
    years, deltas = bti.reference_aging_series()
    n = bti.fit_time_exponent(years, deltas)
    rounded = float(f"{n:.3g}")
    assert rounded == 0.234
    assert model.time_exponent == 0.234
    assert bti.DEFAULT_TIME_EXPONENT == 0.234
    report(10, f"power-law fit over the 10-year reference series gives "
               f"n = {n:.6f} -> {rounded} (3 s.f.), installed as the default")
