import numpy as np
import pytest

from rejuvsim import bti, netlist, timing, trace
from rejuvsim.errors import CalibrationError, DegradationOverflowError
from rejuvsim.netlist import ACTIVATION, build_decoder, enumerate_paths
from rejuvsim.timing import (GateDelayModel, GroupDelayEvaluator, aged_delay,
                             aging_percentage, build_report, critical_delays,
                             load_gate_model, nominal_delay, slack)
from rejuvsim.trace import DutyProfile, duty_from_histograms

STRONG = """\
t_ref_years=3
time_exponent=0.234
vdd_V=0.95
vth0_V=0.35
[NMOS]
0,0
0.5,120
1.0,250
[PMOS]
0,0
0.5,150
1.0,400
"""


def stress_only(stress):
    return DutyProfile(net_duty={}, stress_duty=stress, group_histograms={},
                       observed_cycles=0)


def zero_duty(design):
    stress = {}
    for pd in design.pre_decoders:
        for gate in pd.gates:
            for t in gate.transistors:
                stress[t.tid] = 0.0
    return stress_only(stress)


def uniform_duty(design):
    hists = {g: np.full(1 << design.group_size(g),
                        1.0 / (1 << design.group_size(g)))
             for g in range(len(design.groups))}
    return duty_from_histograms(design, hists)


def test_nominal_is_chain_sum(tiny):
    gdm = GateDelayModel({("INV", 1): 0.5, ("NAND", 2): 1.0})
    paths = enumerate_paths(tiny)
    inv_path = next(p for p in paths if p.through_inverter)
    direct = next(p for p in paths if not p.through_inverter)
    assert nominal_delay(tiny, inv_path, gdm) == pytest.approx(1.5)
    assert nominal_delay(tiny, direct, gdm) == pytest.approx(1.0)


def test_identical_chains_identical_delay(nand_nor, gdm):
    paths = enumerate_paths(nand_nor)
    a = next(p for p in paths if p.group == 0 and p.through_inverter)
    b = next(p for p in paths if p.group == 1 and p.through_inverter)
    assert nominal_delay(nand_nor, a, gdm) == nominal_delay(nand_nor, b, gdm)


def test_inverter_paths_strictly_slower(nand_nor, gdm):
    by_output = {}
    for p in enumerate_paths(nand_nor):
        if p.group != 0:
            continue
        by_output.setdefault(p.output_index, []).append(p)
    for paths in by_output.values():
        inv = [nominal_delay(nand_nor, p, gdm) for p in paths if p.through_inverter]
        direct = [nominal_delay(nand_nor, p, gdm) for p in paths
                  if not p.through_inverter]
        for i in inv:
            for d in direct:
                assert i > d


def test_zero_stress_keeps_nominal(nand_nor, model, gdm):
    duty = zero_duty(nand_nor)
    for p in enumerate_paths(nand_nor):
        assert aged_delay(nand_nor, p, duty, model, 3.0, gdm) == pytest.approx(
            nominal_delay(nand_nor, p, gdm), abs=1e-15)


def test_single_gate_closed_form(tiny, model, gdm):
    # direct activation path of output 3: one NAND2, pull-up PMOS drives
    p = next(q for q in enumerate_paths(tiny)
             if q.output_index == 3 and not q.through_inverter
             and q.direction == ACTIVATION)
    assert len(p.gate_chain) == 1
    gate = tiny.gate_by_id[p.gate_chain[0]]
    stress = {t.tid: 0.0 for t in gate.transistors}
    pmos = [t for t in gate.transistors if t.device == "PMOS"]
    stress[pmos[0].tid] = 0.6
    stress[pmos[1].tid] = 0.3
    got = aged_delay(tiny, p, stress_only(stress), model, 5.0, gdm)

    # independent scalar evaluation of the same contract
    x, y = model.curves["PMOS"]
    dv = float(np.interp(0.6, x, y)) * (5.0 / 3.0) ** 0.234
    expected = 1.10 * ((0.95 - 0.35) / (0.95 - 0.35 - dv)) ** 1.3
    assert got == pytest.approx(expected, rel=1e-12)
    assert got > nominal_delay(tiny, p, gdm)


def test_aged_monotone_in_duty(nand_nor, model, gdm):
    rng = np.random.default_rng(2)
    paths = enumerate_paths(nand_nor)
    base = zero_duty(nand_nor).stress_duty
    for _ in range(5):
        lo = {k: float(rng.uniform(0, 0.7)) for k in base}
        hi = {k: min(1.0, v + float(rng.uniform(0, 0.3))) for k, v in lo.items()}
        for p in paths[::7]:
            assert aged_delay(nand_nor, p, stress_only(hi), model, 3.0, gdm) >= \
                aged_delay(nand_nor, p, stress_only(lo), model, 3.0, gdm)


def test_critical_delays_per_group(nand_nor, model, gdm):
    duty = uniform_duty(nand_nor)
    paths = enumerate_paths(nand_nor)
    crit = critical_delays(nand_nor, paths, duty, model, 3.0, gdm)
    assert set(crit) == {0, 1, 2}
    for g, (nom, aged) in crit.items():
        assert aged >= nom
        assert nom == pytest.approx(1.67)


def test_aged_critical_argmax_can_move(nand_nor, gdm):
    strong = bti.load_calibration(STRONG)
    # stress only the short all-direct paths of output 7 in group 0
    stress = zero_duty(nand_nor).stress_duty
    gate = nand_nor.gate_by_id["g0_nand7"]
    for t in gate.transistors:
        stress[t.tid] = 1.0
    duty = stress_only(stress)
    best_nom, best_aged = None, None
    for p in enumerate_paths(nand_nor):
        if p.group != 0:
            continue
        nom = nominal_delay(nand_nor, p, gdm)
        aged = aged_delay(nand_nor, p, duty, strong, 3.0, gdm)
        if best_nom is None or nom > best_nom[0]:
            best_nom = (nom, p.pid, p.output_index)
        if best_aged is None or aged > best_aged[0]:
            best_aged = (aged, p.pid, p.output_index)
    assert best_nom[2] != 7  # nominal critical path goes through an inverter
    assert best_aged[2] == 7  # heavy stress promotes the short path


def test_uniform_duty_keeps_nominal_critical_path(nand_nor, model, gdm):
    duty = uniform_duty(nand_nor)
    rows = []
    for p in enumerate_paths(nand_nor):
        rows.append((nominal_delay(nand_nor, p, gdm),
                     aged_delay(nand_nor, p, duty, model, 3.0, gdm)))
    nom_max = max(r[0] for r in rows)
    aged_max = max(r[1] for r in rows)
    for nom, aged in rows:
        if abs(aged - aged_max) <= 1e-12:
            assert abs(nom - nom_max) <= 1e-12


def test_aging_percentage_basics():
    assert aging_percentage(1.0, 1.0) == 100.0
    assert aging_percentage(1.0, 1.2) == pytest.approx(120.0)
    with pytest.raises(ValueError):
        aging_percentage(0.0, 1.0)


def test_aging_percentage_scale_invariant(nand_nor, model):
    rng = np.random.default_rng(8)
    hists = {}
    for g in range(3):
        h = rng.random(8)
        hists[g] = h / h.sum()
    duty = duty_from_histograms(nand_nor, hists)
    results = []
    for c in (1.0, 3.5):
        gdm = GateDelayModel({("INV", 1): 0.35 * c, ("NAND", 3): 1.32 * c})
        paths = enumerate_paths(nand_nor)
        crit = critical_delays(nand_nor, paths, duty, model, 3.0, gdm)
        nom = max(v[0] for v in crit.values())
        aged = max(v[1] for v in crit.values())
        results.append(aging_percentage(nom, aged))
    assert results[0] == pytest.approx(results[1], abs=1e-9)


def test_zero_calibration_gives_exactly_100(nand_nor, gdm):
    zero = bti.zero_model()
    duty = uniform_duty(nand_nor)
    report = build_report(nand_nor, duty, zero, 3.0, gdm)
    assert report.aging_percentage == 100.0


def test_slack_examples():
    assert slack(2.0, 0.2, 1.5) == pytest.approx(0.3)
    assert slack(2.0, 0.2, 1.8) == pytest.approx(0.0)
    assert slack(2.0, 0.2, 1.9) < 0


def test_report_invariants_and_violation(nand_nor, model, gdm):
    spec = trace.WorkloadSpec("fir", 100_000, 0.95, 0.01, 0.04, 105)
    tr = trace.synth_workload(spec, nand_nor)
    duty = trace.duty_profile(tr, nand_nor)
    report = build_report(nand_nor, duty, model, 3.0, gdm)
    assert report.aging_percentage >= 100.0
    for row in report.paths:
        assert row.aged >= row.nominal
    assert report.violated == (report.slack_remaining < 0)
    assert len(report.paths) == 144


def test_report_writers_deterministic(tmp_path, nand_nor, model, gdm):
    duty = uniform_duty(nand_nor)
    report = build_report(nand_nor, duty, model, 3.0, gdm)
    for writer, name in ((timing.write_report_json, "r.json"),
                         (timing.write_report_csv, "r.csv")):
        writer(report, tmp_path / name)
        first = (tmp_path / name).read_bytes()
        writer(report, tmp_path / name)
        assert (tmp_path / name).read_bytes() == first
    csv_text = (tmp_path / "r.csv").read_text()
    assert csv_text.count("\ngroup,") == 1
    assert "overall," in csv_text


def test_degradation_overflow(nand_nor, gdm):
    strong = bti.load_calibration(STRONG)
    stress = zero_duty(nand_nor).stress_duty
    duty = stress_only({k: 1.0 for k in stress})
    p = enumerate_paths(nand_nor)[0]
    with pytest.raises(DegradationOverflowError):
        # 400 mV at the reference age outgrows the 600 mV overdrive by 30 years
        aged_delay(nand_nor, p, duty, strong, 30.0, gdm)


def test_missing_gate_entry(tiny):
    gdm = GateDelayModel({("INV", 1): 0.5})
    p = enumerate_paths(tiny)[0]
    with pytest.raises(CalibrationError, match="NAND"):
        nominal_delay(tiny, p, gdm)


def test_gate_model_file_parsing(tmp_path):
    text = "alpha=1.5\nvdd_V=1.0\nvth0_V=0.4\nINV,1,0.2\nNAND,2,0.9\n"
    gdm = load_gate_model(text)
    assert gdm.alpha == 1.5
    assert gdm.base("NAND", 2) == 0.9
    with pytest.raises(CalibrationError):
        load_gate_model("alpha=3.0\nINV,1,0.2\n")
    with pytest.raises(CalibrationError):
        load_gate_model("INV,1,-0.2\n")
    p = tmp_path / "g.txt"
    p.write_text(text)
    assert load_gate_model(str(p)).base("INV", 1) == 0.2


def test_evaluator_matches_scalar_path(nand_nor, model, gdm):
    rng = np.random.default_rng(4)
    ev = GroupDelayEvaluator(nand_nor, 1, gdm, model, 3.0)
    paths = [p for p in enumerate_paths(nand_nor) if p.group == 1]
    for _ in range(10):
        h = rng.random(8)
        h /= h.sum()
        duty = duty_from_histograms(nand_nor, {0: np.full(8, 1 / 8), 1: h,
                                               2: np.full(8, 1 / 8)})
        crit = np.zeros(8)
        for p in paths:
            a = aged_delay(nand_nor, p, duty, model, 3.0, gdm)
            crit[p.output_index] = max(crit[p.output_index], a)
        assert np.max(np.abs(ev.output_criticals(h) - crit)) <= 1e-12


def test_evaluator_years_override(nand_nor, model, gdm):
    ev3 = GroupDelayEvaluator(nand_nor, 0, gdm, model, 3.0)
    ev7 = GroupDelayEvaluator(nand_nor, 0, gdm, model, 7.0)
    h = np.full(8, 1 / 8)
    assert np.allclose(ev3.output_criticals(h, years=7.0),
                       ev7.output_criticals(h), atol=1e-15)


def test_aging_monotone_concave_in_years(nand_nor, model, gdm):
    spec = trace.WorkloadSpec("fir", 50_000, 0.95, 0.01, 0.04, 105)
    tr = trace.synth_workload(spec, nand_nor)
    duty = trace.duty_profile(tr, nand_nor)
    ev = [GroupDelayEvaluator(nand_nor, g, gdm, model, 3.0) for g in range(3)]
    nominal = max(float(e.nominal_output_criticals().max()) for e in ev)
    series = []
    for y in range(1, 11):
        aged = max(float(e.minimax(duty.group_histograms[g], years=y))
                   for g, e in enumerate(ev))
        series.append(aging_percentage(nominal, aged))
    diffs = np.diff(series)
    assert np.all(diffs > 0)
    assert np.all(np.diff(series, 2) < 1e-9)
