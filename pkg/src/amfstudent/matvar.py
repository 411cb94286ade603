"""Complex matrix-variate samplers and partitioned F blocks.

All samplers take an optional ``size`` giving a leading batch dimension, so
``sample_complex_wishart(4, 10, np.eye(4), rng, size=1000)`` returns an array
of shape ``(1000, 4, 4)``. With ``size=None`` a single matrix is returned.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .randvar import StreamLike, as_generator, draw_standard_complex_normal

__all__ = [
    "NotPositiveDefiniteError",
    "PartitionedF",
    "hermitian_sqrt",
    "cholesky",
    "sample_complex_gaussian_matrix",
    "sample_complex_wishart",
    "sample_complex_wishart_naive",
    "bartlett_factor",
    "sample_complex_matrix_t",
    "sample_complex_f",
    "partition_f",
    "schur_f",
    "is_hermitian_pd",
]

SQRT_EIG_RTOL = 1e-12


class NotPositiveDefiniteError(np.linalg.LinAlgError):
    """Raised when a matrix that must be Hermitian positive definite is not."""


def _ct(a):
    return np.conj(np.swapaxes(a, -1, -2))


def _batch_shape(size):
    if size is None:
        return ()
    if np.isscalar(size):
        return (int(size),)
    return tuple(size)


def is_hermitian_pd(m, rtol: float = 1e-10) -> bool:
    m = np.asarray(m)
    scale = np.max(np.abs(m), axis=(-2, -1), keepdims=True)
    if np.any(np.abs(m - _ct(m)) > rtol * scale):
        return False
    try:
        np.linalg.cholesky(m)
    except np.linalg.LinAlgError:
        return False
    return True


def cholesky(m):
    """Lower Cholesky factor; raises :class:`NotPositiveDefiniteError`."""
    try:
        return np.linalg.cholesky(m)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefiniteError(str(exc)) from None


def hermitian_sqrt(m):
    """Unique Hermitian square root via eigendecomposition.

    Eigenvalues below ``1e-12`` times the largest one are treated as a
    numerically singular input and rejected.
    """
    m = np.asarray(m)
    w, v = np.linalg.eigh(m)
    wmax = w[..., -1:]
    if np.any(wmax <= 0) or np.any(w <= SQRT_EIG_RTOL * wmax):
        raise NotPositiveDefiniteError("matrix is not numerically positive definite")
    return (v * np.sqrt(w)[..., None, :]) @ _ct(v)


def sample_complex_gaussian_matrix(p, n, mean, row_cov, col_cov, stream: StreamLike,
                                   size=None):
    """Draw ``X ~ CN_{p,n}(mean, row_cov, col_cov)`` as ``mean + A Z B^H``."""
    mean = np.zeros((p, n), complex) if mean is None else np.asarray(mean)
    row_cov = np.asarray(row_cov)
    col_cov = np.asarray(col_cov)
    if mean.shape[-2:] != (p, n) or row_cov.shape != (p, p) or col_cov.shape != (n, n):
        raise ValueError("dimension mismatch between mean, row_cov, col_cov and (p, n)")
    a = cholesky(row_cov)
    b = cholesky(col_cov)
    z = draw_standard_complex_normal(stream, _batch_shape(size) + (p, n))
    return mean + a @ z @ _ct(b)


def bartlett_factor(p, dof, stream: StreamLike, size=None):
    """Lower-triangular ``A`` with ``A A^H ~ CW_p(dof, I)``.

    ``|a_ii|^2 ~ Gamma(dof - i + 1, 1)`` for ``i = 1..p``; strictly lower
    entries are standard complex normal.
    """
    if dof < p:
        raise ValueError(f"dof={dof} < p={p}: singular Wishart not supported")
    rng = as_generator(stream)
    shape = _batch_shape(size)
    a = np.zeros(shape + (p, p), dtype=complex)
    shapes = dof - np.arange(p, dtype=float)
    diag = np.sqrt(rng.gamma(shapes, 1.0, shape + (p,)))
    idx = np.arange(p)
    a[..., idx, idx] = diag
    rows, cols = np.tril_indices(p, -1)
    a[..., rows, cols] = draw_standard_complex_normal(rng, shape + (rows.size,))
    return a


def sample_complex_wishart(p, dof, scale, stream: StreamLike, size=None):
    """Draw from ``CW_p(dof, scale)`` by the Bartlett construction."""
    scale = np.asarray(scale)
    if scale.shape != (p, p):
        raise ValueError("scale must be p x p")
    c = cholesky(scale)
    ca = c @ bartlett_factor(p, dof, stream, size)
    return ca @ _ct(ca)


def sample_complex_wishart_naive(p, dof, scale, stream: StreamLike, size=None):
    """Draw from ``CW_p(dof, scale)`` as a sum of ``dof`` outer products."""
    x = sample_complex_gaussian_matrix(p, dof, None, scale, np.eye(dof), stream, size)
    return x @ _ct(x)


def sample_complex_matrix_t(p, n, nu_param, mean, sigma, omega, stream: StreamLike,
                            size=None):
    """Draw ``X ~ CT_{p,n}(nu_param, mean, sigma, omega)``.

    ``X = mean + (W^{-1/2})^H Y`` with ``W ~ CW_p(nu_param + p - 1, sigma^{-1})``
    and ``Y ~ CN_{p,n}(0, I_p, omega)``.

    With ``sigma = C C^H`` and Bartlett factor ``A``, ``W = L L^H`` where
    ``L = C^{-H} A``, hence ``(W^{-1/2})^H = L^{-H} = C A^{-H}``.
    """
    sigma = np.asarray(sigma)
    omega = np.asarray(omega)
    if sigma.shape != (p, p) or omega.shape != (n, n):
        raise ValueError("dimension mismatch between sigma, omega and (p, n)")
    if nu_param < 1:
        raise ValueError("nu_param must be >= 1")
    rng = as_generator(stream)
    c = cholesky(sigma)
    a = bartlett_factor(p, nu_param + p - 1, rng, size)
    y = sample_complex_gaussian_matrix(p, n, None, np.eye(p), omega, rng, size)
    x = c @ np.linalg.solve(_ct(a), y)
    if mean is not None:
        x = x + np.asarray(mean)
    return x


def sample_complex_f(p, n1, n2, stream: StreamLike, size=None):
    """Draw ``F = S1^{1/2} S2^{-1} S1^{1/2} ~ CF_p(n1, n2)``.

    ``S1 ~ CW_p(n1, I)``, ``S2 ~ CW_p(n2, I)``, Hermitian square root of ``S1``.
    """
    if n1 < p or n2 < p:
        raise ValueError(f"need n1 >= p and n2 >= p, got p={p}, n1={n1}, n2={n2}")
    rng = as_generator(stream)
    eye = np.eye(p)
    s1 = sample_complex_wishart(p, n1, eye, rng, size)
    s2 = sample_complex_wishart(p, n2, eye, rng, size)
    r = hermitian_sqrt(s1)
    f = r @ np.linalg.solve(s2, r)
    return 0.5 * (f + _ct(f))


@dataclass(frozen=True)
class PartitionedF:
    F11: np.ndarray
    F12: np.ndarray
    F21: np.ndarray
    F22: np.ndarray

    @property
    def r(self) -> int:
        return self.F11.shape[-1]

    @property
    def s(self) -> int:
        return self.F22.shape[-1]

    def assemble(self) -> np.ndarray:
        top = np.concatenate([self.F11, self.F12], axis=-1)
        bottom = np.concatenate([self.F21, self.F22], axis=-1)
        return np.concatenate([top, bottom], axis=-2)


def partition_f(f, r: int) -> PartitionedF:
    """Split ``f`` (``..., p, p``) into blocks with ``F11`` of size ``r x r``."""
    f = np.asarray(f)
    p = f.shape[-1]
    if not 1 <= r < p:
        raise ValueError(f"partition index r={r} must satisfy 1 <= r < {p}")
    return PartitionedF(
        F11=f[..., :r, :r], F12=f[..., :r, r:], F21=f[..., r:, :r], F22=f[..., r:, r:]
    )


def schur_f(pf: PartitionedF):
    """``F_{1.2} = F11 - F12 F22^{-1} F21``."""
    try:
        t = np.linalg.solve(pf.F22, pf.F21)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefiniteError(f"F22 is singular: {exc}") from None
    out = pf.F11 - pf.F12 @ t
    return 0.5 * (out + _ct(out))
