"""Matrix-free samplers for the SNR loss, the loss factor and Kelly's statistic.

Each statistic is written as a function of independent complex chi-square
variates (Gamma(q, 1), see :mod:`amfstudent.randvar`). All samplers are
vectorized: ``size`` draws are returned as an array inside a :class:`RepDraw`,
together with the intermediate variates in ``aux``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal

import numpy as np
from scipy import special

from .randvar import (
    StreamLike,
    as_generator,
    draw_complex_chi_square,
    draw_noncentral_complex_chi_square_1,
    draw_standard_complex_normal,
)

__all__ = [
    "RepDraw",
    "TTILDE_VARIANTS",
    "DEFAULT_TTILDE_VARIANT",
    "draw_rho_student",
    "draw_rho_gaussian",
    "draw_beta_student",
    "draw_beta_gaussian",
    "draw_ttilde_student",
    "draw_ttilde_gaussian",
    "draw_f22",
    "draw_t12_given_f22",
    "rho_student_from_uniforms",
]

TTILDE_VARIANTS = ("shared", "independent")
# chosen by the two-path KS comparison, see experiments.verify
DEFAULT_TTILDE_VARIANT = "shared"


@dataclass
class RepDraw:
    value: np.ndarray
    aux: dict = field(default_factory=dict)

    def __len__(self):
        return np.size(self.value)


def _check_nk(N, K):
    if N < 1 or K < N:
        raise ValueError(f"need 1 <= N <= K, got N={N}, K={K}")


def draw_f22(N, K, nu, stream: StreamLike, size=None):
    """``F22 ~ Cchi2_nu / Cchi2_{K-N+1}``."""
    rng = as_generator(stream)
    return draw_complex_chi_square(nu, rng, size) / draw_complex_chi_square(K - N + 1, rng, size)


def draw_rho_student(N, K, nu, stream: StreamLike, size=None) -> RepDraw:
    """SNR loss with Student training:
    ``[1 + (1 + Cchi2_{K-N+1}/Cchi2_nu) Cchi2_{N-1}/Cchi2_{K-N+2}]^{-1}``."""
    _check_nk(N, K)
    if nu < 1:
        raise ValueError("nu must be >= 1")
    rng = as_generator(stream)
    c_kn1 = draw_complex_chi_square(K - N + 1, rng, size)
    c_nu = draw_complex_chi_square(nu, rng, size)
    f2 = _f2(N, K, rng, size)
    f1 = c_kn1 / c_nu
    return RepDraw(1.0 / (1.0 + (1.0 + f1) * f2), {"f1": f1, "f2": f2})


def _f2(N, K, rng, size):
    if N == 1:
        return np.zeros(() if size is None else size)
    return draw_complex_chi_square(N - 1, rng, size) / draw_complex_chi_square(K - N + 2, rng, size)


def draw_rho_gaussian(N, K, stream: StreamLike, size=None) -> RepDraw:
    """SNR loss with Gaussian training: ``[1 + Cchi2_{N-1}/Cchi2_{K-N+2}]^{-1}``,
    i.e. Beta(K-N+2, N-1)."""
    _check_nk(N, K)
    f2 = _f2(N, K, as_generator(stream), size)
    return RepDraw(1.0 / (1.0 + f2), {"f2": f2})


def draw_beta_student(N, K, nu, mu, stream: StreamLike, size=None) -> RepDraw:
    """Loss factor with Student training:
    ``[1 + (Cchi2_{nu-1}/mu) Cchi2_{N-1}/Cchi2_{K-N+2}]^{-1}``."""
    _check_nk(N, K)
    if nu < 2 or mu <= 0:
        raise ValueError("need nu >= 2 and mu > 0")
    rng = as_generator(stream)
    scale = draw_complex_chi_square(nu - 1, rng, size) / mu
    f2 = _f2(N, K, rng, size)
    return RepDraw(1.0 / (1.0 + scale * f2), {"chi2_nu_minus_1": scale * mu, "f2": f2})


def draw_beta_gaussian(N, K, stream: StreamLike, size=None) -> RepDraw:
    """Same law as :func:`draw_rho_gaussian`."""
    return draw_rho_gaussian(N, K, stream, size)


def draw_ttilde_student(N, K, nu, mu, snr_bar, stream: StreamLike, size=None,
                        variant: Literal["shared", "independent"] = DEFAULT_TTILDE_VARIANT
                        ) -> RepDraw:
    """Kelly's statistic with Student training and Gaussian test data.

    ``t~ = mu^{-1} F22 V / (1 + (Cchi2_{nu-1}/mu) q / g) * Cchi2_1(delta)`` with
    ``V = 1 + (1 + 1/F22) q / gamma12``, ``q ~ Cchi2_{N-1}`` shared between
    numerator and denominator, ``g ~ Cchi2_{K-N+2}`` and
    ``delta = snr_bar / V``.

    ``variant="shared"`` uses ``gamma12 = g`` (one draw); ``"independent"``
    draws ``gamma12`` separately. The shared form is the one that matches
    the matrix-level simulation.
    """
    _check_nk(N, K)
    if nu < 2 or mu <= 0 or snr_bar < 0:
        raise ValueError("need nu >= 2, mu > 0, snr_bar >= 0")
    if variant not in TTILDE_VARIANTS:
        raise ValueError(f"variant must be one of {TTILDE_VARIANTS}")
    rng = as_generator(stream)
    f22 = draw_f22(N, K, nu, rng, size)
    q = draw_complex_chi_square(N - 1, rng, size) if N > 1 else np.zeros(() if size is None else size)
    g = draw_complex_chi_square(K - N + 2, rng, size)
    c_nu1 = draw_complex_chi_square(nu - 1, rng, size)
    gamma12 = g if variant == "shared" else draw_complex_chi_square(K - N + 2, rng, size)

    var = 1.0 + (1.0 + 1.0 / f22) * q / gamma12
    delta = snr_bar / var
    chi = draw_noncentral_complex_chi_square_1(delta, rng)
    value = (f22 * var / mu) / (1.0 + (c_nu1 / mu) * q / g) * chi
    aux = {"f22": f22, "gamma12": gamma12, "x1_norm_sq": q, "chi2_nu_minus_1": c_nu1,
           "delta": delta}
    return RepDraw(value, aux)


def draw_ttilde_gaussian(N, K, snr_bar, stream: StreamLike, size=None) -> RepDraw:
    """``t~ | beta ~ Cchi2_1(beta snr_bar) / Cchi2_{K-N+1}`` with beta drawn
    from the Gaussian loss-factor law."""
    _check_nk(N, K)
    if snr_bar < 0:
        raise ValueError("snr_bar must be nonnegative")
    rng = as_generator(stream)
    beta = draw_beta_gaussian(N, K, rng, size).value
    chi = draw_noncentral_complex_chi_square_1(beta * snr_bar, rng)
    return RepDraw(chi / draw_complex_chi_square(K - N + 1, rng, size), {"beta": beta})


def draw_t12_given_f22(N, K, f22, stream: StreamLike, size=None):
    """``t12 = (1 + 1/F22)^{1/2} n12 / sqrt(gamma12)``, a complex (N-1)-vector.

    ``n12 ~ CN(0, I_{N-1})`` and ``gamma12 ~ Cchi2_{K-N+2}``. ``f22`` may be
    an array broadcastable to ``size``; the result has shape
    ``size + (N - 1,)``.
    """
    _check_nk(N, K)
    f22 = np.asarray(f22, dtype=float)
    if np.any(f22 <= 0):
        raise ValueError("f22 must be positive")
    rng = as_generator(stream)
    shape = f22.shape if size is None else (size,) if np.isscalar(size) else tuple(size)
    n12 = draw_standard_complex_normal(rng, shape + (N - 1,))
    gamma12 = draw_complex_chi_square(K - N + 2, rng, shape)
    factor = np.sqrt((1.0 + 1.0 / f22) / gamma12)
    return factor[..., None] * n12


def rho_student_from_uniforms(N, K, nu, u):
    """SNR loss from four shared uniforms by inverse-CDF chi-square draws.

    ``u`` has shape ``(4, ...)`` and feeds ``Cchi2_{K-N+1}``, ``Cchi2_nu``,
    ``Cchi2_{N-1}`` and ``Cchi2_{K-N+2}`` in that order. Reusing the same
    ``u`` across ``nu`` gives a common-random-number coupling in which
    ``rho`` is nondecreasing in ``nu``.
    """
    _check_nk(N, K)
    u = np.asarray(u, dtype=float)
    if u.shape[0] != 4 or np.any((u <= 0) | (u >= 1)):
        raise ValueError("u must have shape (4, ...) with entries in (0, 1)")
    c_kn1, c_nu, c_n1, c_kn2 = (special.gammaincinv(q, ui) for q, ui in
                                zip((K - N + 1, nu, N - 1, K - N + 2), u))
    return 1.0 / (1.0 + (1.0 + c_kn1 / c_nu) * c_n1 / c_kn2)
