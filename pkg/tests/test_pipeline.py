import numpy as np
import pytest

from rejuvsim import pipeline
from rejuvsim.pipeline import (DesignPoint, ModelContext, compare_table,
                               lifetime_extension, load_preset_duties,
                               overhead_sweep, ratio_to_fraction, years_sweep)


@pytest.fixture(scope="module")
def ctx(model, gdm):
    return ModelContext(bti=model, gdm=gdm, years=3.0, tol=1e-3, max_iters=400)


@pytest.fixture(scope="module")
def points(ctx, nand_nor, and_and):
    return [DesignPoint("nand_nor_9", nand_nor, ctx),
            DesignPoint("and_and_9", and_and, ctx)]


@pytest.fixture(scope="module")
def duties(points):
    return load_preset_duties(points[0].design, ("aescbc", "fir", "sha"))


def test_ratio_to_fraction():
    assert ratio_to_fraction(0.0) == 0.0
    assert ratio_to_fraction(1.0) == pytest.approx(0.5)
    assert ratio_to_fraction(1.6) == pytest.approx(1.6 / 2.6)
    with pytest.raises(ValueError):
        ratio_to_fraction(-0.1)


def test_compare_rows_dominance(points, duties):
    rows, averages, reductions = compare_table(points, duties, 0.01)
    assert len(rows) == len(points) * len(duties)
    for r in rows:
        for s in ("universal", "design_aware", "design_workload_aware"):
            assert r["min"] - 1e-9 <= r[s] <= r["no_rej"] + 1e-9
        assert r["no_rej"] > 100.0
    for a in averages:
        assert a["design_workload_aware"] <= a["universal"] + 1e-12
        assert a["design_workload_aware"] <= a["design_aware"] + 1e-12
    for red in reductions:
        assert -1e-9 <= red["min_reduction"] <= red["avg_reduction"] \
            <= red["max_reduction"] <= 100.0 + 1e-9


def test_overhead_sweep_shape(points, duties):
    ratios, series, floors = overhead_sweep(points, duties)
    assert ratios == list(pipeline.OVERHEAD_RATIOS)
    for name, vals in series.items():
        diffs = np.diff(vals)
        assert np.all(diffs < 0)
        assert all(v >= floors[name] - 1e-9 for v in vals)


def test_years_sweep_and_extension(points, duties):
    fir = duties["fir"]
    grid, series = years_sweep(points, fir, 0.01)
    assert grid == list(range(1, 11))
    for name, curves in series.items():
        assert all(m <= u for m, u in zip(curves["mitigated"], curves["no_rej"]))
        assert np.all(np.diff(curves["no_rej"]) > 0)
    for point in points:
        matched = lifetime_extension(point, fir, 0.01, 3.0)
        assert matched > 3.0
        # more overhead buys at least as much lifetime
        richer = lifetime_extension(point, fir, 0.05, 3.0)
        assert richer >= matched - 1e-9


def test_design_aware_cached(points):
    first = points[0].design_aware
    assert points[0].design_aware is first


def test_writers_stable(tmp_path, points, duties):
    rows, averages, reductions = compare_table(points, duties, 0.01)
    pipeline.write_compare_csv(rows, averages, tmp_path / "c.csv")
    pipeline.write_reductions_csv(reductions, tmp_path / "r.csv")
    first = (tmp_path / "c.csv").read_bytes()
    pipeline.write_compare_csv(rows, averages, tmp_path / "c.csv")
    assert (tmp_path / "c.csv").read_bytes() == first
    text = first.decode()
    assert text.splitlines()[0] == ("design,workload,nominal,min,"
                                    "design_workload_aware,design_aware,"
                                    "universal,no_rej")
    assert text.count("avg.") == len(points)
