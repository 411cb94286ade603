"""Block-parallel Monte Carlo engine and empirical-distribution utilities.

Trials are cut into fixed-size blocks and block ``b`` of a run tagged ``tag``
always draws from the substream ``RngStream(seed, crc32(tag) << 32 | b)``.
The block layout does not depend on the number of workers, so results are
identical for a fixed seed whatever the parallelism.
"""
from __future__ import annotations

import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import partial
from typing import Callable, Sequence

import numpy as np

from ..adaptive import Hypothesis, ScenarioParams, SignalModel, Training, canonical_model, simulate_direct_batch
from ..randvar import RngStream
from .. import represent

__all__ = [
    "BLOCK_SIZE",
    "EmpiricalDistribution",
    "RunConfig",
    "stream_for",
    "map_blocks",
    "run_monte_carlo",
    "ks_distance",
    "empirical_cdf_at",
    "rep_sampler",
]

BLOCK_SIZE = 10_000
STATISTICS = ("rho", "beta", "t_tilde")


@dataclass(frozen=True)
class EmpiricalDistribution:
    samples: np.ndarray

    def __post_init__(self):
        s = np.sort(np.asarray(self.samples, dtype=float).ravel())
        object.__setattr__(self, "samples", s)

    @property
    def count(self) -> int:
        return self.samples.size

    def cdf(self, points):
        """Right-continuous empirical CDF ``P(X <= x)``."""
        return np.searchsorted(self.samples, points, side="right") / self.count

    def sf(self, points):
        return 1.0 - self.cdf(points)

    def quantile(self, q):
        return np.quantile(self.samples, q)

    def mean(self) -> float:
        return float(np.mean(self.samples))

    def stderr(self) -> float:
        return float(np.std(self.samples, ddof=1) / np.sqrt(self.count))

    def density(self, centers, width):
        """Histogram density on bins ``[c - w/2, c + w/2]`` clipped to the grid."""
        centers = np.asarray(centers, dtype=float)
        lo = np.maximum(centers - width / 2, centers[0])
        hi = np.minimum(centers + width / 2, centers[-1])
        mass = (np.searchsorted(self.samples, hi, side="right")
                - np.searchsorted(self.samples, lo, side="right")) / self.count
        w = hi - lo
        # a single-point grid has no width; report nan without a warning
        return np.divide(mass, w, out=np.full_like(w, np.nan), where=w > 0)

    def histogram(self, bins, range=None):
        dens, edges = np.histogram(self.samples, bins=bins, range=range)
        return dens / (self.count * np.diff(edges)), edges


def ks_distance(a: EmpiricalDistribution, b: EmpiricalDistribution) -> float:
    """Sup-norm distance between the two empirical CDFs."""
    if a.count == 0 or b.count == 0:
        raise ValueError("ks_distance needs nonempty samples")
    pts = np.concatenate([a.samples, b.samples])
    return float(np.max(np.abs(a.cdf(pts) - b.cdf(pts))))


def empirical_cdf_at(dist: EmpiricalDistribution, grid) -> list[tuple[float, float]]:
    grid = np.asarray(grid, dtype=float)
    return list(zip(grid.tolist(), dist.cdf(grid).tolist()))


def stream_for(seed: int, tag: str, block: int) -> RngStream:
    return RngStream(seed, (zlib.crc32(tag.encode()) << 32) | block)


def _call_block(fn, seed, tag, block, n):
    return fn(stream_for(seed, tag, block), n)


def map_blocks(fn: Callable, trials: int, seed: int, tag: str, workers: int = 1,
               block_size: int = BLOCK_SIZE) -> list:
    """Evaluate ``fn(stream, n)`` over consecutive blocks; results in block order.

    ``fn`` must be picklable (a module-level function or a ``partial`` of
    one) when ``workers > 1``.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    sizes = [block_size] * (trials // block_size)
    if trials % block_size:
        sizes.append(trials % block_size)
    jobs = [(fn, seed, tag, b, n) for b, n in enumerate(sizes)]
    if workers <= 1 or len(jobs) == 1:
        out = []
        for job in jobs:
            try:
                out.append(_call_block(*job))
            except Exception as exc:
                # keep the exception type (the CLI maps it to an exit code)
                if exc.args and isinstance(exc.args[0], str):
                    exc.args = (f"trial block {job[3]}: {exc.args[0]}",) + exc.args[1:]
                raise
        return out
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_call_block, *zip(*jobs)))


@dataclass(frozen=True)
class RunConfig:
    scenario: ScenarioParams
    trials: int = 100_000
    seed: int = 0
    path: str = "both"
    hypothesis: str = "H0"
    model: SignalModel | None = None
    ttilde_variant: str = represent.DEFAULT_TTILDE_VARIANT
    workers: int = 1
    output: str | None = None
    rho_grid: Sequence[float] | None = None
    k_values: Sequence[int] | None = None
    nu_values: Sequence[int] | None = None
    extras: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.path not in ("direct", "rep", "representation", "both"):
            raise ValueError(f"unknown path {self.path!r}")
        Hypothesis(self.hypothesis)
        for g in (self.rho_grid, self.k_values, self.nu_values):
            if g is not None and (len(g) == 0 or list(g) != sorted(g)):
                raise ValueError("grids must be nonempty and sorted")

    @property
    def training(self) -> Training:
        return Training.GAUSSIAN if self.scenario.nu is None else Training.STUDENT

    @property
    def paths(self) -> tuple[str, ...]:
        if self.path == "both":
            return ("direct", "rep")
        return ("direct",) if self.path == "direct" else ("rep",)


def _direct_block(params, model, training, hypothesis, stream, n):
    d = simulate_direct_batch(params, model, training, hypothesis, n, stream)
    return np.stack([d.rho, d.beta, d.t_tilde])


def _rep_block(params: ScenarioParams, hypothesis, variant, stream, n):
    N, K, nu, mu = params.N, params.K, params.nu, params.scale
    snr = params.snr_bar if Hypothesis(hypothesis) is Hypothesis.H1 else 0.0
    if nu is None:
        rho = represent.draw_rho_gaussian(N, K, stream, n).value
        beta = represent.draw_beta_gaussian(N, K, stream, n).value
        t = represent.draw_ttilde_gaussian(N, K, snr, stream, n).value
    else:
        rho = represent.draw_rho_student(N, K, nu, stream, n).value
        beta = represent.draw_beta_student(N, K, nu, mu, stream, n).value
        t = represent.draw_ttilde_student(N, K, nu, mu, snr, stream, n, variant=variant).value
    return np.stack([rho, beta, t])


def rep_sampler(statistic: str, params: ScenarioParams, hypothesis="H0",
                variant: str = represent.DEFAULT_TTILDE_VARIANT) -> Callable:
    """Picklable ``fn(stream, n)`` drawing one representation statistic."""
    return partial(_rep_single, statistic, params, hypothesis, variant)


def _rep_single(statistic, params, hypothesis, variant, stream, n):
    N, K, nu, mu = params.N, params.K, params.nu, params.scale
    snr = params.snr_bar if Hypothesis(hypothesis) is Hypothesis.H1 else 0.0
    gauss = nu is None
    if statistic == "rho":
        d = represent.draw_rho_gaussian(N, K, stream, n) if gauss else \
            represent.draw_rho_student(N, K, nu, stream, n)
    elif statistic == "beta":
        d = represent.draw_beta_gaussian(N, K, stream, n) if gauss else \
            represent.draw_beta_student(N, K, nu, mu, stream, n)
    elif statistic == "t_tilde":
        d = represent.draw_ttilde_gaussian(N, K, snr, stream, n) if gauss else \
            represent.draw_ttilde_student(N, K, nu, mu, snr, stream, n, variant=variant)
    else:
        raise ValueError(f"unknown statistic {statistic!r}")
    return d.value


def _tag(kind: str, config: RunConfig) -> str:
    s = config.scenario
    return f"{kind}:{s.N}:{s.K}:{s.nu}:{s.scale!r}:{s.snr_bar!r}:{config.hypothesis}"


def run_monte_carlo(config: RunConfig) -> dict[str, dict[str, EmpiricalDistribution]]:
    """Simulate ``rho``, ``beta`` and ``t_tilde`` along the requested path(s).

    Returns ``{path: {statistic: EmpiricalDistribution}}`` with ``path`` in
    ``("direct", "rep")``.
    """
    model = config.model or canonical_model(config.scenario.N)
    out = {}
    for path in config.paths:
        if path == "direct":
            fn = partial(_direct_block, config.scenario, model, config.training.value,
                         config.hypothesis)
        else:
            fn = partial(_rep_block, config.scenario, config.hypothesis, config.ttilde_variant)
        blocks = map_blocks(fn, config.trials, config.seed, _tag(path, config), config.workers)
        stacked = np.concatenate(blocks, axis=1)
        out[path] = {name: EmpiricalDistribution(stacked[i]) for i, name in enumerate(STATISTICS)}
    return out
