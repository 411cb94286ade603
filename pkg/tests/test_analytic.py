import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate, optimize

from amfstudent import analytic, matvar, represent
from amfstudent.randvar import RngStream
from amfstudent.experiments.montecarlo import stream_for

mp.mp.dps = 40


def _quad(fn, a=0.0, b=1.0):
    return integrate.quad(fn, a, b, epsabs=0, epsrel=1e-11, limit=400)[0]


def _hist_sup(samples, pdf, bins, lo, hi):
    dens, edges = np.histogram(samples, bins=bins, range=(lo, hi))
    dens = dens / (samples.size * np.diff(edges))
    centers = 0.5 * (edges[1:] + edges[:-1])
    return np.max(np.abs(dens - pdf(centers)))


# -- gamma / beta


def test_ln_gamma_and_beta_values():
    assert analytic.ln_gamma(1.0) == 0.0
    assert math.isclose(analytic.ln_gamma(5.0), math.log(24), rel_tol=1e-15)
    assert analytic.beta_fn(1, 1) == pytest.approx(1.0, rel=1e-15)
    # B(18, 15) = 17! 14! / 32! exactly
    exact = math.factorial(17) * math.factorial(14) / math.factorial(32)
    assert abs(analytic.beta_fn(18, 15) / exact - 1) < 1e-12
    for bad in (0.0, -1.0):
        with pytest.raises(ValueError):
            analytic.ln_gamma(bad)
        with pytest.raises(ValueError):
            analytic.beta_fn(bad, 1.0)


# -- 2F1


def test_hyp2f1_trivial_cases():
    r = analytic.hyp2f1(2.5, 3.0, 4.0, 0.0)
    assert r.value == 1.0 and r.converged
    assert abs(analytic.hyp2f1(1, 1, 2, 0.5).value / (2 * math.log(2)) - 1) < 1e-12


def test_hyp2f1_vs_euler_integral_oracle():
    ref = mp.quad(lambda t: t ** 16 * (1 - t) ** 30 * (1 - mp.mpf("0.3") * t) ** -33, [0, 1])
    ref /= mp.beta(17, 31)
    assert abs(analytic.hyp2f1(33, 17, 48, 0.3).value / float(ref) - 1) < 1e-9
    assert abs(analytic.hyp2f1_euler_integral(33, 17, 48, 0.3) / float(ref) - 1) < 1e-9


@pytest.mark.parametrize("a, b, c, x", [
    (33, 17, 48, 0.3), (17, 1, 48, 0.99), (17, 1, 48, 0.999999), (33, 17, 178, 0.75),
    (17, 11, 22, -0.7), (17, 11, 22, -300.0), (33, 17, 48, 0.999), (1, 19, 34, 0.6),
    (-3, 2, 5, 0.9), (49, 17, 64, 0.5), (65, 49, 224, 0.9999), (2.5, 1.5, 3.25, -0.49),
])
def test_hyp2f1_vs_mpmath(a, b, c, x):
    r = analytic.hyp2f1(a, b, c, x)
    ref = float(mp.hyp2f1(a, b, c, x))
    assert r.converged
    assert abs(r.value / ref - 1) < 1e-10


def test_hyp2f1_transformations_agree():
    # |x| <= 0.5 direct series vs the Pfaff / Euler transformed forms
    a, b, c, x = 3.5, 2.0, 6.25, 0.45
    direct = analytic.hyp2f1(a, b, c, x).value
    pfaff = (1 - x) ** (-a) * analytic.hyp2f1(a, c - b, c, x / (x - 1)).value
    euler = (1 - x) ** (c - a - b) * analytic.hyp2f1(c - a, c - b, c, x).value
    assert abs(pfaff / direct - 1) < 1e-10
    assert abs(euler / direct - 1) < 1e-10


def test_hyp2f1_rejects_bad_input():
    with pytest.raises(ValueError):
        analytic.hyp2f1(1, 1, -2, 0.1)
    with pytest.raises(ValueError):
        analytic.hyp2f1(1, 1, 2, 1.0)


def test_series_flags_non_convergence():
    r = analytic.hyp2f1(1, 1, 2, 0.4, max_terms=3)
    assert not r.converged
    with pytest.raises(analytic.ConvergenceError):
        r.require()


@settings(max_examples=40, deadline=None)
@given(a=st.floats(0.5, 40), b=st.floats(0.5, 40), dc=st.floats(0.5, 60),
       x=st.floats(-20, 0.95))
def test_hyp2f1_property_vs_mpmath(a, b, dc, x):
    c = max(a, b) + dc
    r = analytic.hyp2f1(a, b, c, x)
    ref = mp.hyp2f1(a, b, c, x)
    assert r.converged
    assert abs(r.value - float(ref)) <= 1e-9 * abs(float(ref))


# -- 3F2 at unit argument


def _hyp3f2_series(a1, a2, a3, b1, b2):
    # mpmath's hyp3f2 is unreliable at z = 1 for these sizes; sum the series
    def term(n):
        return mp.rf(a1, n) * mp.rf(a2, n) * mp.rf(a3, n) / (mp.rf(b1, n) * mp.rf(b2, n)
                                                             * mp.factorial(n))
    return mp.nsum(term, [0, mp.inf])


@pytest.mark.parametrize("N, K, nu", [(16, 32, 160), (16, 32, 18), (16, 24, 32), (16, 64, 18),
                                      (4, 9, 5)])
def test_hyp3f2_vs_series_oracle(N, K, nu):
    params = (1, K - N + 3, K - N + 1, K + 2, nu + K - N + 2)
    r = analytic.hyp3f2_unit(*params)
    assert abs(r.value / float(_hyp3f2_series(*params)) - 1) < 1e-10


def test_hyp3f2_terminating_and_divergent():
    assert analytic.hyp3f2_unit(0, 2, 3, 4, 5).value == 1.0
    assert analytic.hyp3f2_unit(-2, 1, 1, 0.5, 0.5).converged
    with pytest.raises(ValueError):
        analytic.hyp3f2_unit(1, 2, 3, 2, 3)


# -- conditional and Gaussian densities


def test_pdf_rho_given_f1_normalized_and_transcribed():
    N, K = 16, 32
    assert abs(_quad(lambda r: float(analytic.pdf_rho_given_f1(r, 2.0, N, K))) - 1) < 1e-8
    rho, f1 = mp.mpf("0.5"), mp.mpf(1)
    ref = ((1 + f1) ** (K - N + 2) * rho ** (K - N + 1) * (1 - rho) ** (N - 2)
           / ((1 + rho * f1) ** (K + 1) * mp.beta(N - 1, K - N + 2)))
    assert abs(float(analytic.pdf_rho_given_f1(0.5, 1.0, N, K)) / float(ref) - 1) < 1e-12


def test_pdf_rho_given_f1_zero_is_beta():
    from scipy import stats
    r = np.linspace(0.01, 0.99, 17)
    assert np.allclose(analytic.pdf_rho_given_f1(r, 0.0, 16, 32), stats.beta(18, 15).pdf(r),
                       rtol=1e-12)
    with pytest.raises(ValueError):
        analytic.pdf_rho_given_f1(1.5, 0.0, 16, 32)
    with pytest.raises(ValueError):
        analytic.pdf_rho_given_f1(0.5, -1.0, 16, 32)


# -- Student SNR-loss density


@pytest.mark.parametrize("K, nu", [(32, 32), (32, 18), (24, 160)])
def test_pdf_rho_student_normalized(K, nu):
    assert abs(_quad(lambda r: analytic.pdf_rho_student(r, 16, K, nu)) - 1) < 1e-6


def test_pdf_rho_student_vs_marginalization():
    grid = np.linspace(0.05, 0.95, 10)
    a = analytic.pdf_rho_student(grid, 16, 32, 32)
    b = analytic.pdf_rho_student_by_marginalization(grid, 16, 32, 32)
    assert np.max(np.abs(a / b - 1)) < 1e-6


def test_pdf_rho_student_vs_mpmath_formula():
    N, K, nu, rho = 16, 32, 18, mp.mpf("0.2")
    ref = (mp.beta(K - N + 1, nu + N - 1) / (mp.beta(N - 1, K - N + 2) * mp.beta(K - N + 1, nu))
           * rho ** (K - N + 1) * (1 - rho) ** (N - 2) * mp.hyp2f1(K + 1, K - N + 1, nu + K, 1 - rho))
    assert abs(analytic.pdf_rho_student(0.2, N, K, nu) / float(ref) - 1) < 1e-10


@pytest.mark.xfail(strict=False, reason="noise-limited: with 1e6 draws and 200 bins the density "
                   "peak (4.4) gives bin noise sd 0.03, and exact multinomial draws from the "
                   "closed form exceed a 0.05 sup-norm in about 95% of runs")
def test_pdf_rho_student_histogram():
    rho = represent.draw_rho_student(16, 32, 32, RngStream(1), 10**6).value
    sup = _hist_sup(rho, lambda c: analytic.pdf_rho_student(c, 16, 32, 32), 200, 0.0, 1.0)
    assert sup < 0.05


def test_pdf_rho_student_histogram_ten_million():
    rho = np.concatenate([represent.draw_rho_student(16, 32, 32, stream_for(1, "hist", b), 10**6)
                          .value for b in range(10)])
    sup = _hist_sup(rho, lambda c: analytic.pdf_rho_student(c, 16, 32, 32), 200, 0.0, 1.0)
    assert sup < 0.05


# -- means


def test_mean_rho_gaussian_and_large_nu():
    assert analytic.mean_rho_gaussian(16, 32) == 18 / 33
    assert analytic.mean_rho_student(16, 32, math.inf) == 18 / 33
    assert abs(analytic.mean_rho_student(16, 32, 10**6) - 18 / 33) < 1e-4


@pytest.mark.parametrize("K, nu", [(32, 32), (32, 160), (64, 18)])
def test_mean_rho_student_three_way(K, nu):
    closed = analytic.mean_rho_student(16, K, nu)
    quad = analytic.mean_rho_student_by_quadrature(16, K, nu)
    mc = represent.draw_rho_student(16, K, nu, RngStream(K * nu), 10**6).value.mean()
    assert abs(closed - quad) < 1e-8
    assert abs(closed - mc) < 0.003


def test_mean_rho_student_mc_ten_million():
    x = np.concatenate([represent.draw_rho_student(16, 32, 32, stream_for(3, "mean", b), 10**6)
                        .value for b in range(10)])
    assert abs(analytic.mean_rho_student(16, 32, 32) - x.mean()) < 0.002


def test_mean_rho_student_monotone():
    ks = list(range(20, 129, 4))
    prev_nu = None
    for nu in (18, 32, 160):
        means = np.array([analytic.mean_rho_student(16, K, nu) for K in ks])
        assert np.all(np.diff(means) >= 0)
        assert np.all(means <= np.array([analytic.mean_rho_gaussian(16, K) for K in ks]))
        if prev_nu is not None:
            assert np.all(means >= prev_nu)
        prev_nu = means


def test_mean_rho_given_f1():
    N, K = 16, 32
    assert math.isclose(analytic.mean_rho_given_f1(0.0, N, K), 18 / 33, rel_tol=1e-14)
    quad = _quad(lambda r: r * float(analytic.pdf_rho_given_f1(r, 1.0, N, K)))
    assert abs(analytic.mean_rho_given_f1(1.0, N, K) / quad - 1) < 1e-8
    vals = [analytic.mean_rho_given_f1(f, N, K) for f in (0, 0.5, 1, 2, 4)]
    assert np.all(np.diff(vals) < 0)


# -- F22, F2, t12


def test_pdf_f22_normalized_and_mode():
    p, q, n = 16, 32, 32
    assert abs(_quad(lambda f: float(analytic.pdf_f22(f, p, q, n)), 0, np.inf) - 1) < 1e-8
    res = optimize.minimize_scalar(lambda f: -float(analytic.pdf_f22(f, p, q, n)),
                                   bounds=(1e-6, 50), method="bounded",
                                   options={"xatol": 1e-10})
    assert abs(res.x - (q - 1) / (n - p + 2)) < 1e-5


def test_pdf_f22_scalar_case_histogram():
    q, n = 5, 10
    x = (represent.draw_f22(1, n, q, RngStream(2), 10**6))
    assert _hist_sup(x, lambda c: analytic.pdf_f22(c, 1, q, n), 100, 0.0, 5.0) < 0.05


def test_pdf_f2():
    N, K = 16, 32
    assert abs(_quad(lambda f: float(analytic.pdf_f2(f, N, K)), 0, np.inf) - 1) < 1e-8
    ref = mp.mpf(2) ** (-(K + 1)) / mp.beta(N - 1, K - N + 2)
    assert abs(float(analytic.pdf_f2(1.0, N, K)) / float(ref) - 1) < 1e-12
    x = represent.draw_rho_gaussian(N, K, RngStream(3), 10**6).aux["f2"]
    assert _hist_sup(x, lambda c: analytic.pdf_f2(c, N, K), 100, 0.0, 3.0) < 0.05


def test_pdf_t12_normalized_and_value_at_zero():
    p, q, n = 4, 8, 16
    total = _quad(lambda u: float(analytic.pdf_t12_norm_sq(u, p, q, n)), 0, np.inf)
    assert abs(total - 1) < 1e-5
    log_c = (math.lgamma(n + 1) - (p - 1) * math.log(math.pi) - math.lgamma(n - p + 2)
             - analytic.ln_beta(q, n - p + 1))
    at_zero = math.exp(log_c + analytic.ln_beta(p + q - 1, n - p + 1))
    assert math.isclose(analytic.pdf_t12_marginal(0.0, p, q, n), at_zero, rel_tol=1e-12)


def test_pdf_t12_vs_marginalization():
    # t12 | F22 ~ complex t-like with scale (1 + 1/F22); integrate out F22
    p, q, n = 4, 8, 16
    m, k = p - 1, n - p + 2

    def cond(u, f):
        s = 1 + 1 / f
        return (math.exp(math.lgamma(k + m) - math.lgamma(k) - m * math.log(math.pi))
                * s ** (-m) * (1 + u / s) ** (-(k + m)))

    for u in (0.0, 0.3, 2.0):
        ref = _quad(lambda f: cond(u, f) * float(analytic.pdf_f22(f, p, q, n)), 0, np.inf)
        assert abs(analytic.pdf_t12_marginal(u, p, q, n) / ref - 1) < 1e-8


def test_pdf_t12_histogram_from_matrix_f():
    p, q, n = 4, 8, 16
    u = []
    for b in range(10):
        f = matvar.sample_complex_f(p, q, n, stream_for(4, "t12", b), 10**5)
        u.append(np.sum(np.abs(f[:, :-1, -1] / f[:, -1:, -1].real) ** 2, axis=-1))
    u = np.concatenate(u)
    sup = _hist_sup(u, lambda c: analytic.pdf_t12_norm_sq(c, p, q, n), 100, 0.0, 1.0)
    assert sup < 0.05


# -- Gaussian Pfa


def test_gaussian_pfa_threshold():
    assert analytic.gaussian_pfa_threshold(1.0, 16, 32) == 0.0
    eta = analytic.gaussian_pfa_threshold(1e-3, 16, 32)
    assert math.isclose(eta, 10 ** (3 / 17) - 1, rel_tol=1e-13)
    assert abs(eta - 0.501311) < 1e-6
    assert math.isclose(float(analytic.gaussian_pfa(eta, 16, 32)), 1e-3, rel_tol=1e-12)
    t = represent.draw_ttilde_gaussian(16, 32, 0.0, RngStream(5), 10**6).value
    assert abs(np.mean(t > eta) - 1e-3) < 4 * math.sqrt(1e-3 / 1e6)
    for bad in (0.0, 1.5):
        with pytest.raises(ValueError):
            analytic.gaussian_pfa_threshold(bad, 16, 32)
