"""Adaptive matched filter and Kelly statistics computed from raw snapshots.

This is the matrix-level path: training data are drawn, the sample covariance
is formed and factorized, and the statistics are evaluated directly. It is
slower than the chi-square representations but makes no distributional
shortcut, so it serves as the reference the representations are checked
against.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .matvar import NotPositiveDefiniteError, cholesky, sample_complex_matrix_t
from .randvar import StreamLike, as_generator, draw_standard_complex_normal

__all__ = [
    "ScenarioParams",
    "SignalModel",
    "Training",
    "Hypothesis",
    "KellyStats",
    "DirectDraws",
    "optimal_weights",
    "scm",
    "amf_weights",
    "snr_loss",
    "kelly_stats",
    "simulate_direct",
    "simulate_direct_batch",
    "toeplitz_covariance",
    "steering_vector",
    "canonical_model",
]

_CHUNK = 4096


class Training(str, enum.Enum):
    GAUSSIAN = "gaussian"
    STUDENT = "student"


class Hypothesis(str, enum.Enum):
    H0 = "H0"
    H1 = "H1"


@dataclass(frozen=True)
class ScenarioParams:
    """Problem dimensions. ``mu=None`` selects the default ``nu - N``."""

    N: int
    K: int
    nu: int | None = None
    mu: float | None = None
    snr_bar: float = 0.0

    def __post_init__(self):
        if self.N < 2:
            raise ValueError("N must be >= 2")
        if self.K < self.N:
            raise ValueError("K must be >= N so that S is invertible")
        if self.nu is not None and self.nu < self.N:
            raise ValueError("nu must be >= N so that the mixing Wishart is invertible")
        if self.mu is not None and self.mu <= 0:
            raise ValueError("mu must be positive")
        if self.snr_bar < 0:
            raise ValueError("snr_bar must be nonnegative")

    @property
    def scale(self) -> float:
        """Effective ``mu``; defaults to ``nu - N``."""
        if self.mu is not None:
            return float(self.mu)
        if self.nu is None:
            return 1.0
        return float(self.nu - self.N)


@dataclass(frozen=True)
class SignalModel:
    """Noise covariance ``sigma``, signature ``v`` and amplitude ``alpha``."""

    sigma: np.ndarray
    v: np.ndarray
    alpha: complex = 0.0

    def __post_init__(self):
        sigma = np.asarray(self.sigma, dtype=complex)
        v = np.asarray(self.v, dtype=complex)
        if sigma.ndim != 2 or sigma.shape[0] != sigma.shape[1] or v.shape != sigma.shape[:1]:
            raise ValueError("sigma must be N x N and v of length N")
        if not np.any(v):
            raise ValueError("signature v must be nonzero")
        cholesky(sigma)
        object.__setattr__(self, "sigma", sigma)
        object.__setattr__(self, "v", v)

    @property
    def N(self) -> int:
        return self.v.shape[0]

    @property
    def whitened_gain(self) -> float:
        """``v^H Sigma^{-1} v``."""
        return float(np.real(np.vdot(self.v, np.linalg.solve(self.sigma, self.v))))

    def alpha_for(self, snr_bar: float) -> float:
        """Real amplitude with ``|alpha|^2 v^H Sigma^{-1} v = snr_bar``."""
        return float(np.sqrt(snr_bar / self.whitened_gain))


class KellyStats(NamedTuple):
    s1: float
    s2: float
    beta: float
    t_tilde: float


class DirectDraws(NamedTuple):
    rho: np.ndarray
    beta: np.ndarray
    t_tilde: np.ndarray


def canonical_model(N: int) -> SignalModel:
    """``Sigma = I``, ``v = e_N``."""
    v = np.zeros(N, complex)
    v[-1] = 1.0
    return SignalModel(np.eye(N, dtype=complex), v)


def toeplitz_covariance(N: int, corr: float = 0.9) -> np.ndarray:
    idx = np.arange(N)
    return (corr ** np.abs(idx[:, None] - idx[None, :])).astype(complex)


def steering_vector(N: int, spatial_freq: float = 0.1) -> np.ndarray:
    """Uniform-phase steering vector ``exp(2j pi f n)``."""
    return np.exp(2j * np.pi * spatial_freq * np.arange(N))


def _mvdr(cov, v):
    try:
        u = np.linalg.solve(cov, v)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefiniteError(str(exc)) from None
    return u / np.vdot(v, u)


def optimal_weights(model: SignalModel) -> np.ndarray:
    """``w_opt = (v^H Sigma^{-1} v)^{-1} Sigma^{-1} v``."""
    return _mvdr(model.sigma, model.v)


def scm(x_train) -> np.ndarray:
    """Sample covariance ``S = X X^H`` (no 1/K normalization)."""
    x_train = np.asarray(x_train)
    if x_train.shape[-1] < x_train.shape[-2]:
        raise ValueError("need at least as many snapshots as channels")
    s = x_train @ np.conj(np.swapaxes(x_train, -1, -2))
    return s


def amf_weights(s, v) -> np.ndarray:
    """``w_amf = (v^H S^{-1} v)^{-1} S^{-1} v``."""
    cholesky(s)
    return _mvdr(np.asarray(s), np.asarray(v, dtype=complex))


def snr_loss(w, model: SignalModel) -> float:
    """``|w^H v|^2 / ((v^H Sigma^{-1} v) (w^H Sigma w))``, in [0, 1]."""
    w = np.asarray(w, dtype=complex)
    if not np.any(w):
        raise ValueError("filter must be nonzero")
    num = np.abs(np.vdot(w, model.v)) ** 2
    den = model.whitened_gain * np.real(np.vdot(w, model.sigma @ w))
    return float(num / den)


def _kelly_from_solves(x, s_inv_x, s_inv_v, v):
    s1 = np.real(np.einsum("...i,...i->...", np.conj(x), s_inv_x))
    v_s_v = np.real(np.einsum("...i,...i->...", np.conj(v), s_inv_v))
    s2 = np.abs(np.einsum("...i,...i->...", np.conj(x), s_inv_v)) ** 2 / v_s_v
    # s2 <= s1 by Cauchy-Schwarz; clip rounding
    s2 = np.minimum(s2, s1)
    denom = 1.0 + s1 - s2
    return s1, s2, 1.0 / denom, s2 / denom


def kelly_stats(x, x_train, v) -> KellyStats:
    """``s1 = x^H S^{-1} x``, ``s2 = |x^H S^{-1} v|^2 / v^H S^{-1} v``,
    ``beta = 1/(1 + s1 - s2)`` and Kelly's ``t~ = s2/(1 + s1 - s2)``."""
    x = np.asarray(x, dtype=complex)
    v = np.asarray(v, dtype=complex)
    s = scm(x_train)
    cholesky(s)
    sol = np.linalg.solve(s, np.stack([x, v], axis=-1))
    s1, s2, beta, t = _kelly_from_solves(x, sol[:, 0], sol[:, 1], v)
    return KellyStats(float(s1), float(s2), float(beta), float(t))


def _draw_training(params: ScenarioParams, model: SignalModel, training, rng, n):
    N, K = params.N, params.K
    if Training(training) is Training.GAUSSIAN:
        c = cholesky(model.sigma)
        z = draw_standard_complex_normal(rng, (n, N, K))
        return c @ z
    if params.nu is None:
        raise ValueError("Student training requires nu")
    return sample_complex_matrix_t(
        N, K, params.nu - N + 1, None, params.scale * model.sigma, np.eye(K), rng, size=n
    )


def _direct_chunk(params, model, training, hypothesis, rng, n):
    N = params.N
    x_train = _draw_training(params, model, training, rng, n)
    s = scm(x_train)
    cholesky(s)

    c = cholesky(model.sigma)
    x = c @ draw_standard_complex_normal(rng, (n, N))[..., None]
    x = x[..., 0]
    if Hypothesis(hypothesis) is Hypothesis.H1:
        x = x + model.alpha_for(params.snr_bar) * model.v

    v = model.v
    rhs = np.stack([np.broadcast_to(x, (n, N)), np.broadcast_to(v, (n, N))], axis=-1)
    sol = np.linalg.solve(s, rhs)
    s_inv_x, s_inv_v = sol[..., 0], sol[..., 1]

    # SNR loss of w_amf (scale-free, so S^{-1} v suffices)
    num = np.abs(s_inv_v @ np.conj(v)) ** 2
    quad = np.real(np.einsum("ni,ij,nj->n", np.conj(s_inv_v), model.sigma, s_inv_v))
    rho = num / (model.whitened_gain * quad)

    _, _, beta, t = _kelly_from_solves(x, s_inv_x, s_inv_v, v)
    return rho, beta, t


def simulate_direct_batch(params: ScenarioParams, model: SignalModel, training, hypothesis,
                          n: int, stream: StreamLike) -> DirectDraws:
    """Run ``n`` independent end-to-end trials.

    Under H1 the test vector mean is ``alpha v`` with
    ``alpha = sqrt(snr_bar / v^H Sigma^{-1} v)``; ``model.alpha`` is not used.
    """
    if model.N != params.N:
        raise ValueError("model dimension does not match params.N")
    rng = as_generator(stream)
    parts = []
    done = 0
    while done < n:
        m = min(_CHUNK, n - done)
        parts.append(_direct_chunk(params, model, training, hypothesis, rng, m))
        done += m
    if not parts:
        empty = np.empty(0)
        return DirectDraws(empty, empty, empty)
    return DirectDraws(*(np.concatenate(col) for col in zip(*parts)))


def simulate_direct(params: ScenarioParams, model: SignalModel, training, hypothesis,
                    stream: StreamLike) -> tuple[float, float, float]:
    """One trial: returns ``(rho, beta, t_tilde)``."""
    d = simulate_direct_batch(params, model, training, hypothesis, 1, stream)
    return float(d.rho[0]), float(d.beta[0]), float(d.t_tilde[0])
