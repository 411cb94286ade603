"""Special functions and closed-form laws for the SNR loss and related blocks.

The Gauss hypergeometric series is evaluated directly for ``|x| <= 0.5`` and
through the Pfaff (``x < -0.5``) and Euler (``0.5 < x < 1``) transformations
otherwise. When the transformed series is still too slow it falls back to the
Euler integral. Everything that involves gamma or beta functions is done in
log space.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, special

__all__ = [
    "ConvergenceError",
    "SeriesResult",
    "ln_gamma",
    "ln_beta",
    "beta_fn",
    "hyp2f1",
    "hyp2f1_euler_integral",
    "hyp3f2_unit",
    "pdf_complex_f_scalar",
    "pdf_rho_given_f1",
    "pdf_rho_gaussian",
    "pdf_rho_student",
    "pdf_rho_student_by_marginalization",
    "mean_rho_gaussian",
    "mean_rho_given_f1",
    "mean_rho_student",
    "mean_rho_student_by_quadrature",
    "pdf_f1",
    "pdf_f2",
    "pdf_f22",
    "pdf_t12_marginal",
    "pdf_t12_norm_sq",
    "gaussian_pfa",
    "gaussian_pfa_threshold",
]

SERIES_RTOL = 1e-12
MAX_TERMS = 10**6
QUAD_RTOL = 1e-9


class ConvergenceError(ArithmeticError):
    """A series or quadrature failed to reach its tolerance."""


@dataclass(frozen=True)
class SeriesResult:
    value: float
    terms_used: int
    converged: bool
    log_value: float = math.nan

    def __float__(self):
        return self.value

    def require(self) -> float:
        if not self.converged:
            raise ConvergenceError(
                f"series did not converge after {self.terms_used} terms"
            )
        return self.value


def _positive(name, *vals):
    for v in vals:
        if not np.all(np.asarray(v) > 0):
            raise ValueError(f"{name} requires positive arguments, got {v!r}")


def ln_gamma(x):
    _positive("ln_gamma", x)
    return special.gammaln(x)


def ln_beta(a, b):
    _positive("ln_beta", a, b)
    return special.gammaln(a) + special.gammaln(b) - special.gammaln(np.add(a, b))


def beta_fn(a, b):
    """``B(a, b) = Gamma(a) Gamma(b) / Gamma(a + b)``, computed in log space."""
    return np.exp(ln_beta(a, b))


# --------------------------------------------------------------------------
# hypergeometric functions


def _is_nonpos_int(v) -> bool:
    return v <= 0 and float(v).is_integer()


def _series(coef_num, coef_den, x, tail_power, tol, max_terms):
    """Sum ``sum_n t_n`` with ``t_{n+1}/t_n = prod(a+n) x / (prod(b+n) (n+1))``.

    Returns ``(log|sum|, sign, terms, converged)``. ``tail_power`` is the
    algebraic decay exponent of the terms at ``|x| = 1`` (``None`` if the
    series only converges geometrically); it sharpens the stopping rule.
    """
    total = 1.0
    term = 1.0
    log_scale = 0.0
    geo = 1.0 / (1.0 - abs(x)) if abs(x) < 1 else math.inf
    for n in range(max_terms):
        num = x
        for a in coef_num:
            num *= a + n
        den = float(n + 1)
        for b in coef_den:
            den *= b + n
        if num == 0.0:
            return math.log(abs(total)) + log_scale, math.copysign(1.0, total), n + 1, True
        term *= num / den
        total += term
        if abs(total) > 1e250:
            total /= 1e250
            term /= 1e250
            log_scale += 250 * math.log(10)
        ratio = abs(num / den)
        if ratio < 1.0:
            tail = geo
            if tail_power is not None and tail_power > 0:
                tail = min(tail, (n + 2) / tail_power)
            if abs(term) * tail <= tol * abs(total):
                return math.log(abs(total)) + log_scale, math.copysign(1.0, total), n + 2, True
    return math.log(abs(total)) + log_scale, math.copysign(1.0, total), max_terms, False


def _hyp2f1_log(a, b, c, x, tol, max_terms):
    """``(log|2F1|, sign, terms, converged)`` for real ``x < 1``."""
    if x == 0.0 or a == 0.0 or b == 0.0:
        return 0.0, 1.0, 1, True
    terminating = _is_nonpos_int(a) or _is_nonpos_int(b)
    if abs(x) <= 0.5 or terminating:
        return _series((a, b), (c,), x, c - a - b, tol, max_terms)
    if x < -0.5:
        # Pfaff: (1-x)^{-a} 2F1(a, c-b; c; x/(x-1))
        z = x / (x - 1.0)
        lv, sgn, n, ok = _hyp2f1_log(a, c - b, c, z, tol, max_terms)
        return lv - a * math.log1p(-x), sgn, n, ok
    # 0.5 < x < 1
    pre = 0.0
    if c - a - b < 0:
        # Euler: (1-x)^{c-a-b} 2F1(c-a, c-b; c; x)
        pre = (c - a - b) * math.log1p(-x)
        a, b = c - a, c - b
    lv, sgn, n, ok = _series((a, b), (c,), x, c - a - b, tol, max_terms)
    if not ok:
        fallback = hyp2f1_euler_integral(a, b, c, x)
        if fallback is not None and fallback > 0:
            return math.log(fallback) + pre, 1.0, n, True
    return lv + pre, sgn, n, ok


def hyp2f1_euler_integral(a, b, c, x):
    """``2F1`` by quadrature of the Euler integral; ``None`` if not applicable.

    Requires ``c > b > 0`` (after swapping ``a`` and ``b`` if that helps) and
    ``x < 1``.
    """
    if not (c > b > 0):
        a, b = b, a
    if not (c > b > 0) or x >= 1:
        return None
    log_norm = special.gammaln(c) - special.gammaln(b) - special.gammaln(c - b)

    def integrand(t):
        if t <= 0.0 or t >= 1.0:
            return 0.0
        return math.exp(
            log_norm + (b - 1) * math.log(t) + (c - b - 1) * math.log1p(-t)
            - a * math.log1p(-x * t)
        )

    val, err = integrate.quad(integrand, 0.0, 1.0, epsabs=0.0, epsrel=1e-11, limit=500)
    if not np.isfinite(val) or err > 1e-8 * abs(val):
        return None
    return val


def hyp2f1(a, b, c, x, tol: float = SERIES_RTOL, max_terms: int = MAX_TERMS) -> SeriesResult:
    """Gauss hypergeometric function ``2F1(a, b; c; x)`` for real ``x < 1``."""
    if _is_nonpos_int(c):
        raise ValueError("c must not be a non-positive integer")
    x = float(x)
    if not x < 1.0:
        raise ValueError("x must be < 1")
    lv, sgn, n, ok = _hyp2f1_log(float(a), float(b), float(c), x, tol, max_terms)
    return SeriesResult(sgn * math.exp(lv), n, ok, lv)


def hyp3f2_unit(a1, a2, a3, b1, b2, tol: float = SERIES_RTOL,
                max_terms: int = MAX_TERMS) -> SeriesResult:
    """``3F2(a1, a2, a3; b1, b2; 1)``.

    The series at unit argument converges only when
    ``b1 + b2 - a1 - a2 - a3 > 0``; other inputs are rejected unless the
    series terminates.
    """
    for b in (b1, b2):
        if _is_nonpos_int(b):
            raise ValueError("lower parameters must not be non-positive integers")
    terminating = any(_is_nonpos_int(a) for a in (a1, a2, a3))
    excess = b1 + b2 - a1 - a2 - a3
    if excess <= 0 and not terminating:
        raise ValueError(f"3F2 at unit argument diverges: b1+b2-a1-a2-a3 = {excess} <= 0")
    lv, sgn, n, ok = _series(
        (float(a1), float(a2), float(a3)), (float(b1), float(b2)), 1.0, excess, tol, max_terms
    )
    return SeriesResult(sgn * math.exp(lv), n, ok, lv)


# --------------------------------------------------------------------------
# densities


def _check_unit_interval(rho):
    rho = np.asarray(rho, dtype=float)
    if np.any((rho < 0) | (rho > 1)) or np.any(~np.isfinite(rho)):
        raise ValueError("rho must lie in [0, 1]")
    return rho


def _check_nk(N, K):
    if N < 2 or K < N:
        raise ValueError(f"need 2 <= N <= K, got N={N}, K={K}")


def pdf_complex_f_scalar(f, n1, n2):
    """Density of ``Cchi2_{n1} / Cchi2_{n2}``: ``f^{n1-1} (1+f)^{-(n1+n2)} / B(n1, n2)``."""
    f = np.asarray(f, dtype=float)
    if np.any(f < 0):
        raise ValueError("f must be nonnegative")
    _positive("pdf_complex_f_scalar", n1, n2)
    with np.errstate(divide="ignore"):
        logp = special.xlogy(n1 - 1, f) - (n1 + n2) * np.log1p(f) - ln_beta(n1, n2)
    return np.exp(logp)


def pdf_f1(f1, N, K, nu):
    """Density of ``F1 = Cchi2_{K-N+1} / Cchi2_nu``."""
    return pdf_complex_f_scalar(f1, K - N + 1, nu)


def pdf_f2(f2, N, K):
    """Density of ``F2 = Cchi2_{N-1} / Cchi2_{K-N+2}``."""
    _check_nk(N, K)
    return pdf_complex_f_scalar(f2, N - 1, K - N + 2)


def pdf_f22(f, p, q, n):
    """Density of the ``(p, p)`` entry of ``F ~ CF_p(q, n)``:
    ``f^{q-1} (1+f)^{-(q+n-p+1)} / B(q, n-p+1)``."""
    if n - p + 1 <= 0:
        raise ValueError("need n >= p")
    return pdf_complex_f_scalar(f, q, n - p + 1)


def pdf_rho_given_f1(rho, f1, N, K):
    """Conditional SNR-loss density given ``F1 = f1``.

    ``(1+f1)^{K-N+2} rho^{K-N+1} (1-rho)^{N-2} / ((1 + rho f1)^{K+1} B(N-1, K-N+2))``
    """
    _check_nk(N, K)
    rho = _check_unit_interval(rho)
    if np.any(np.asarray(f1) < 0):
        raise ValueError("f1 must be nonnegative")
    logp = (
        (K - N + 2) * np.log1p(f1)
        + special.xlogy(K - N + 1, rho)
        + special.xlog1py(N - 2, -rho)
        - (K + 1) * np.log1p(rho * f1)
        - ln_beta(N - 1, K - N + 2)
    )
    return np.exp(logp)


def pdf_rho_gaussian(rho, N, K):
    """Beta(K-N+2, N-1) density."""
    return pdf_rho_given_f1(rho, 0.0, N, K)


def _pdf_rho_student_scalar(rho, N, K, nu, log_norm):
    if rho == 0.0:
        return 0.0
    h = hyp2f1(K + 1, K - N + 1, nu + K, 1.0 - rho)
    h.require()
    return math.exp(
        log_norm + (K - N + 1) * math.log(rho) + special.xlog1py(N - 2, -rho) + h.log_value
    )


def pdf_rho_student(rho, N, K, nu):
    """SNR-loss density with Student training.

    ``B(K-N+1, nu+N-1) / (B(N-1, K-N+2) B(K-N+1, nu)) rho^{K-N+1} (1-rho)^{N-2}
    2F1(K+1, K-N+1; nu+K; 1-rho)``
    """
    _check_nk(N, K)
    if nu <= 1:
        raise ValueError("nu must be > 1")
    rho = _check_unit_interval(rho)
    log_norm = ln_beta(K - N + 1, nu + N - 1) - ln_beta(N - 1, K - N + 2) - ln_beta(K - N + 1, nu)
    out = np.array([_pdf_rho_student_scalar(float(r), N, K, nu, log_norm) for r in rho.ravel()])
    return out.reshape(rho.shape) if rho.ndim else float(out[0])


def _over_positive_axis(fn, rtol=QUAD_RTOL):
    """``int_0^inf fn(f) df`` through ``x = f / (1 + f)``."""

    def mapped(x):
        if x >= 1.0:
            return 0.0
        f = x / (1.0 - x)
        return fn(f) / (1.0 - x) ** 2

    val, err = integrate.quad(mapped, 0.0, 1.0, epsabs=0.0, epsrel=rtol, limit=400)
    return val, err


def pdf_rho_student_by_marginalization(rho, N, K, nu):
    """``int p(rho | f1) p_F1(f1) df1`` by adaptive quadrature (no 2F1)."""
    _check_nk(N, K)
    rho = _check_unit_interval(rho)
    out = []
    for r in rho.ravel():
        val, _ = _over_positive_axis(
            lambda f: float(pdf_rho_given_f1(r, f, N, K) * pdf_f1(f, N, K, nu)), rtol=1e-11
        )
        out.append(val)
    out = np.array(out)
    return out.reshape(rho.shape) if rho.ndim else float(out[0])


def mean_rho_gaussian(N, K) -> float:
    _check_nk(N, K)
    return (K - N + 2) / (K + 1)


def mean_rho_given_f1(f1, N, K) -> float:
    """``E[rho | F1] = (K-N+2)/(K+1) (1+F1)^{-1} 2F1(1, K-N+3; K+2; F1/(1+F1))``."""
    _check_nk(N, K)
    if f1 < 0:
        raise ValueError("f1 must be nonnegative")
    h = hyp2f1(1, K - N + 3, K + 2, f1 / (1.0 + f1)).require()
    return mean_rho_gaussian(N, K) * h / (1.0 + f1)


def mean_rho_student(N, K, nu) -> float:
    """``E[rho] = nu (K-N+2) / ((nu+K-N+1)(K+1)) 3F2(1, K-N+3, K-N+1; K+2, nu+K-N+2; 1)``.

    ``nu = inf`` gives the Gaussian value ``(K-N+2)/(K+1)``.
    """
    _check_nk(N, K)
    if math.isinf(nu):
        return mean_rho_gaussian(N, K)
    if nu < 2:
        raise ValueError("nu must be >= 2")
    h = hyp3f2_unit(1, K - N + 3, K - N + 1, K + 2, nu + K - N + 2).require()
    log_pre = math.log(nu) + math.log(K - N + 2) - math.log(nu + K - N + 1) - math.log(K + 1)
    return math.exp(log_pre) * h


def mean_rho_student_by_quadrature(N, K, nu) -> float:
    """``int_0^1 rho p(rho) d rho`` using :func:`pdf_rho_student`."""
    val, _ = integrate.quad(
        lambda r: r * pdf_rho_student(r, N, K, nu), 0.0, 1.0, epsabs=0.0, epsrel=QUAD_RTOL,
        limit=200,
    )
    return val


def pdf_t12_marginal(norm_sq, p, q, n):
    """Density of ``t12 = F12 / F22`` (a complex ``(p-1)``-vector) for
    ``F ~ CF_p(q, n)``, as a function of ``||t12||^2``.

    ``C B(p+q-1, n-p+1) 2F1(n+1, p+q-1; n+q; -||t12||^2)`` with
    ``C = Gamma(n+1) / (pi^{p-1} Gamma(n-p+2) B(q, n-p+1))``.

    The beta factor multiplies: it is the value of
    ``int_0^inf F^{p+q-2} (1+F)^{-(q+n)} dF``, which the density must carry
    at ``t12 = 0`` to integrate to one.
    """
    if p < 2 or n - p + 1 <= 0 or q <= 0:
        raise ValueError("need p >= 2, n >= p, q > 0")
    u = np.asarray(norm_sq, dtype=float)
    if np.any(u < 0):
        raise ValueError("norm_sq must be nonnegative")
    log_c = (
        special.gammaln(n + 1) - (p - 1) * math.log(math.pi) - special.gammaln(n - p + 2)
        - ln_beta(q, n - p + 1) + ln_beta(p + q - 1, n - p + 1)
    )
    out = []
    for ui in u.ravel():
        h = hyp2f1(n + 1, p + q - 1, n + q, -float(ui))
        h.require()
        out.append(math.exp(log_c + h.log_value))
    out = np.array(out)
    return out.reshape(u.shape) if u.ndim else float(out[0])


def pdf_t12_norm_sq(u, p, q, n):
    """Density of the scalar ``||t12||^2``: radial law of :func:`pdf_t12_marginal`.

    The volume element of ``C^{p-1}`` at squared radius ``u`` contributes
    ``pi^{p-1} u^{p-2} / Gamma(p-1)``.
    """
    u = np.asarray(u, dtype=float)
    m = p - 1
    with np.errstate(divide="ignore"):
        radial = np.exp(m * math.log(math.pi) + special.xlogy(m - 1, u) - special.gammaln(m))
    return radial * pdf_t12_marginal(u, p, q, n)


# --------------------------------------------------------------------------
# Gaussian false-alarm calibration


def gaussian_pfa(eta, N, K):
    """``P(t~ > eta)`` under H0 with Gaussian training: ``(1 + eta)^{-(K-N+1)}``."""
    if K - N + 1 < 1:
        raise ValueError("need K >= N")
    return (1.0 + np.asarray(eta, dtype=float)) ** (-(K - N + 1))


def gaussian_pfa_threshold(pfa, N, K) -> float:
    """Threshold ``eta = pfa^{-1/(K-N+1)} - 1``."""
    if K - N + 1 < 1:
        raise ValueError("need K >= N")
    if not 0.0 < pfa <= 1.0:
        raise ValueError("pfa must lie in (0, 1]")
    return math.expm1(-math.log(pfa) / (K - N + 1))
