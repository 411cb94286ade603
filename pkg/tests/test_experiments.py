import csv
import io
import json

import numpy as np
import pytest

from amfstudent import analytic
from amfstudent.adaptive import ScenarioParams
from amfstudent.randvar import RngStream
from amfstudent.experiments import figures, montecarlo
from amfstudent.experiments.montecarlo import (
    EmpiricalDistribution,
    RunConfig,
    empirical_cdf_at,
    ks_distance,
    map_blocks,
    run_monte_carlo,
)
from amfstudent.experiments.verify import VerifyConfig, verify_suite


# -- empirical distributions


def test_empirical_cdf_steps():
    assert empirical_cdf_at(EmpiricalDistribution([2.0]), [1.0, 2.0, 3.0]) == \
        [(1.0, 0.0), (2.0, 1.0), (3.0, 1.0)]
    d = EmpiricalDistribution([3.0, 1.0])
    assert [c for _, c in empirical_cdf_at(d, [0.5, 1.0, 2.0, 3.0])] == [0.0, 0.5, 0.5, 1.0]
    assert d.count == 2 and list(d.samples) == [1.0, 3.0]
    assert empirical_cdf_at(EmpiricalDistribution([5.0, 6.0]), [-1.0])[0][1] == 0.0


def test_ks_distance_basic():
    a = EmpiricalDistribution([1.0, 2.0, 3.0])
    assert ks_distance(a, a) == 0.0
    assert ks_distance(a, EmpiricalDistribution([10.0, 11.0])) == 1.0
    with pytest.raises(ValueError):
        ks_distance(a, EmpiricalDistribution([]))


def test_ks_distance_null_quantile():
    rng = np.random.default_rng(0)
    below = sum(
        ks_distance(EmpiricalDistribution(rng.exponential(size=10**4)),
                    EmpiricalDistribution(rng.exponential(size=10**4))) < 0.03
        for _ in range(100)
    )
    assert below >= 95


def test_ks_distance_matches_scipy():
    from scipy import stats
    rng = np.random.default_rng(1)
    x, y = rng.normal(size=500), rng.normal(0.1, size=700)
    assert ks_distance(EmpiricalDistribution(x), EmpiricalDistribution(y)) == \
        pytest.approx(stats.ks_2samp(x, y).statistic, abs=1e-12)


# -- engine


def _draws(stream, n):
    return stream.generator.random(n)


def test_map_blocks_worker_independent():
    one = np.concatenate(map_blocks(_draws, 25_000, 3, "t", workers=1))
    two = np.concatenate(map_blocks(_draws, 25_000, 3, "t", workers=2))
    assert one.size == 25_000
    assert np.array_equal(one, two)
    assert not np.array_equal(one, np.concatenate(map_blocks(_draws, 25_000, 4, "t")))


def _boom(stream, n):
    raise ArithmeticError("bad draw")


def test_map_blocks_reports_block():
    with pytest.raises(ArithmeticError, match="trial block 0"):
        map_blocks(_boom, 10, 0, "x")
    with pytest.raises(ValueError):
        map_blocks(_draws, 0, 0, "x")


def test_run_config_validation():
    s = ScenarioParams(16, 32, 32)
    for kw in ({"trials": 0}, {"path": "sideways"}, {"hypothesis": "H2"},
               {"rho_grid": [0.5, 0.1]}, {"k_values": []}):
        with pytest.raises(ValueError):
            RunConfig(s, **kw)
    assert RunConfig(s, path="both").paths == ("direct", "rep")


def test_run_monte_carlo_deterministic_and_paired():
    cfg = RunConfig(ScenarioParams(6, 12, 8), 3000, seed=5, path="both")
    a = run_monte_carlo(cfg)
    b = run_monte_carlo(RunConfig(ScenarioParams(6, 12, 8), 3000, seed=5, path="both", workers=3))
    assert set(a) == {"direct", "rep"}
    for p in a:
        for s in ("rho", "beta", "t_tilde"):
            assert np.array_equal(a[p][s].samples, b[p][s].samples)


def test_two_path_rho():
    run = run_monte_carlo(RunConfig(ScenarioParams(16, 32, 32), 10**5, seed=1, path="both"))
    assert ks_distance(run["direct"]["rho"], run["rep"]["rho"]) < 0.01


# -- figure tables


def test_write_table_csv_roundtrip(tmp_path):
    t = figures.Table()
    t.add("x", [0.1, 1 / 3])
    t.add("y", [1, 2])
    text = figures.write_table(t, tmp_path / "t.csv")
    rows = list(csv.reader(io.StringIO(text)))
    assert rows[0] == ["x", "y"]
    assert float(rows[1][0]) == 0.1 and float(rows[2][0]) == 1 / 3
    assert (tmp_path / "t.csv").read_text() == text
    assert json.loads(figures.write_table(t, fmt="json"))["columns"]["y"] == [1, 2]
    with pytest.raises(ValueError):
        t.add("z", [1.0])
    with pytest.raises(ValueError):
        figures.write_table(t, fmt="xml")


def test_snrloss_table_values():
    t = figures.generate_fig_cdf("rho", 16, [32], [32], trials=10**5, seed=0,
                                 grid=np.linspace(0, 1, 201))
    assert t.header[:4] == ["value", "cdf_K32_nu32", "cdf_se_K32_nu32", "pdf_K32_nu32"]
    assert "pdf_analytic_K32_nu32" in t.header and "cdf_K32_gauss" in t.header
    assert abs(t.lookup("value", 0.5, "cdf_K32_nu32") - 0.746) < 0.01
    assert abs(t.lookup("value", 0.5, "cdf_K32_gauss") - 0.3) < 0.01
    cdf = t.column("cdf_K32_nu32")
    assert np.all(np.diff(cdf) >= 0)


def test_snrloss_from_run_config():
    cfg = RunConfig(ScenarioParams(8, 16, 12), 2000, seed=1, path="rep", nu_values=[10, 12])
    t = figures.generate_fig_snrloss(cfg)
    assert "cdf_K16_nu10" in t.header and "cdf_K16_nu12" in t.header


def test_cdf_table_deterministic():
    kw = dict(trials=20_000, seed=9, points=11, path="both")
    a = figures.write_table(figures.generate_fig_cdf("t_tilde", 8, [16], [10], **kw))
    b = figures.write_table(figures.generate_fig_cdf("t_tilde", 8, [16], [10], workers=2, **kw))
    assert a == b
    assert "direct_cdf_K16_nu10" in a


def test_mean_vs_k_table():
    t = figures.generate_fig_mean_vs_k(16, [24, 32, 48], [18, 32], trials=10**5, seed=0)
    assert t.lookup("K", 32, "gaussian") == 18 / 33
    for nu in (18, 32):
        an = t.column(f"analytic_nu{nu}")
        assert np.all(np.abs(an - t.column(f"mc_nu{nu}")) < 0.003)
        assert np.all(np.diff(an) >= 0)
        assert np.all(t.column(f"mc_se_nu{nu}") > 0)


def test_find_k():
    assert figures.find_k_for_half_loss(16) == 30
    k = figures.find_k_for_half_loss(16, 18)
    assert abs(k - 96) <= 2
    assert analytic.mean_rho_student(16, k, 18) >= 0.5 > analytic.mean_rho_student(16, k - 1, 18)
    with pytest.raises(LookupError):
        figures.find_k_for_half_loss(16, 18, k_cap=40)
    t = figures.generate_fig_find_k(16, [18, 32])
    assert t.columns["nu"][-1] == "inf" and t.columns["K"][-1] == 30


def test_pfa_table_small():
    t = figures.generate_fig_pfa(16, [32, 64], [32, 160], trials=2 * 10**5, seed=0)
    assert t.header[0] == "nu"
    assert t.column("eta_K32")[0] == pytest.approx(10 ** (3 / 17) - 1, rel=1e-12)
    assert np.all(t.column("pfa_K64") >= t.column("pfa_K32"))
    assert np.all(t.column("pfa_K32") > 1e-3)


# -- verify suite


def test_verify_suite_default_passes():
    report = verify_suite(VerifyConfig())
    assert report.passed, report.text()
    assert report.variant_decision["chosen"] == "shared"
    assert "t~ representation variant" in report.text()
    names = [c.name for c in report.checks]
    assert any(n.startswith("mutation") for n in names)


def test_check_relation():
    from amfstudent.experiments.verify import Check
    assert Check("a", 0.5, 1.0).passed and not Check("a", 0.5, 1.0, ">").passed
    assert not Check("a", float("nan"), 1.0).passed
    assert Check("a", 0.5, 1.0).line().startswith("PASS")
