"""Tabular data behind the SNR-loss, loss-factor, Kelly-statistic and Pfa figures.

Every generator returns a :class:`Table` (ordered columns of equal length)
that :func:`write_table` serializes to CSV or JSON. Monte Carlo columns come
with standard-error columns so tolerances can be audited from the file.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from functools import partial
from typing import Sequence

import numpy as np

from .. import analytic, represent
from ..adaptive import ScenarioParams
from .montecarlo import RunConfig, map_blocks, rep_sampler, run_monte_carlo

__all__ = [
    "Table",
    "write_table",
    "default_nu_grid",
    "default_k_grid",
    "default_pfa_nu_grid",
    "generate_fig_cdf",
    "generate_fig_snrloss",
    "generate_fig_mean_vs_k",
    "find_k_for_half_loss",
    "generate_fig_find_k",
    "generate_fig_pfa",
]

STAT_RANGES = {"rho": (0.0, 1.0), "beta": (0.0, 1.0), "t_tilde": (0.0, 2.0)}


@dataclass
class Table:
    columns: dict[str, list] = field(default_factory=dict)
    notes: dict = field(default_factory=dict)

    def add(self, name: str, values):
        values = list(np.asarray(values).tolist()) if not isinstance(values, list) else values
        if self.columns:
            n = len(next(iter(self.columns.values())))
            if len(values) != n:
                raise ValueError(f"column {name!r} has {len(values)} rows, expected {n}")
        self.columns[name] = values

    def column(self, name: str) -> np.ndarray:
        return np.asarray(self.columns[name])

    @property
    def header(self) -> list[str]:
        return list(self.columns)

    def rows(self):
        return zip(*self.columns.values())

    def lookup(self, key_col: str, key, col: str):
        keys = self.column(key_col)
        idx = int(np.argmin(np.abs(keys - key)))
        if not math.isclose(keys[idx], key, rel_tol=0, abs_tol=1e-12):
            raise KeyError(f"{key_col}={key} not on grid")
        return self.columns[col][idx]


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_table(table: Table, path=None, fmt: str = "csv") -> str:
    """Serialize; floats use the shortest round-trip representation."""
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(table.header)
        for row in table.rows():
            w.writerow([_fmt(v) for v in row])
        text = buf.getvalue()
    elif fmt == "json":
        text = json.dumps({"columns": table.columns, "notes": table.notes}, indent=1) + "\n"
    else:
        raise ValueError(f"unknown format {fmt!r}")
    if path is not None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    return text


def default_nu_grid(N: int) -> list[int]:
    return [N + 2, 2 * N, 10 * N]


def default_k_grid(N: int) -> list[int]:
    return sorted({3 * N // 2, 2 * N, 3 * N, 4 * N})


def default_pfa_nu_grid(N: int) -> list[int]:
    return sorted({N + 2, N + 4, N + 8, 2 * N, 3 * N, 4 * N, 6 * N, 8 * N, 10 * N, 12 * N})


def _label(K, nu):
    return f"K{K}_" + ("gauss" if nu is None else f"nu{nu}")


def generate_fig_cdf(statistic: str, N: int, k_values: Sequence[int], nu_values: Sequence,
                     trials: int = 1_000_000, seed: int = 0, mu=None, snr_bar: float = 0.0,
                     hypothesis: str = "H0", grid=None, points: int = 201, path: str = "rep",
                     include_gaussian: bool = True, workers: int = 1) -> Table:
    """CDF and histogram density of one statistic for every ``(K, nu)`` curve.

    Columns: ``value``, then per curve ``cdf_<label>``, ``cdf_se_<label>``,
    ``pdf_<label>`` (histogram) and, for ``rho`` on Student curves,
    ``pdf_analytic_<label>``. ``label`` is ``K<K>_nu<nu>`` or ``K<K>_gauss``.
    With ``path="both"`` or ``"direct"``, direct-path columns carry a
    ``direct_`` prefix.
    """
    if statistic not in STAT_RANGES:
        raise ValueError(f"unknown statistic {statistic!r}")
    if grid is None:
        lo, hi = STAT_RANGES[statistic]
        grid = np.linspace(lo, hi, points)
    grid = np.asarray(grid, dtype=float)
    width = grid[1] - grid[0] if grid.size > 1 else 1.0
    table = Table()
    table.add("value", grid)
    curves = [(K, nu) for K in k_values for nu in nu_values]
    if include_gaussian:
        curves += [(K, None) for K in k_values]
    for K, nu in curves:
        mu_eff = None if nu is None else (mu if mu is not None else nu - N)
        params = ScenarioParams(N, K, nu, mu_eff, snr_bar)
        cfg = RunConfig(params, trials, seed, path=path, hypothesis=hypothesis, workers=workers)
        res = run_monte_carlo(cfg)
        for p in cfg.paths:
            prefix = "" if p == "rep" else "direct_"
            dist = res[p][statistic]
            cdf = dist.cdf(grid)
            lab = _label(K, nu)
            table.add(f"{prefix}cdf_{lab}", cdf)
            table.add(f"{prefix}cdf_se_{lab}", np.sqrt(cdf * (1 - cdf) / dist.count))
            table.add(f"{prefix}pdf_{lab}", dist.density(grid, width))
        if statistic == "rho":
            if nu is None:
                table.add(f"pdf_analytic_{_label(K, nu)}", analytic.pdf_rho_gaussian(grid, N, K))
            else:
                table.add(f"pdf_analytic_{_label(K, nu)}", analytic.pdf_rho_student(grid, N, K, nu))
    table.notes.update(statistic=statistic, N=N, trials=trials, seed=seed, snr_bar=snr_bar,
                       hypothesis=hypothesis)
    return table


def generate_fig_snrloss(config: RunConfig) -> Table:
    """SNR-loss CDF/pdf table driven by a :class:`RunConfig`."""
    s = config.scenario
    nus = list(config.nu_values) if config.nu_values else ([s.nu] if s.nu else default_nu_grid(s.N))
    ks = list(config.k_values) if config.k_values else [s.K]
    return generate_fig_cdf("rho", s.N, ks, nus, config.trials, config.seed, mu=s.mu,
                            grid=config.rho_grid, path=config.path, workers=config.workers)


def generate_fig_mean_vs_k(N: int, k_values: Sequence[int], nu_values: Sequence[int],
                           trials: int = 1_000_000, seed: int = 0, workers: int = 1) -> Table:
    """Mean SNR loss versus K: closed form per nu, MC cross-check and Gaussian reference."""
    table = Table()
    k_values = list(k_values)
    table.add("K", k_values)
    table.add("gaussian", [analytic.mean_rho_gaussian(N, K) for K in k_values])
    for nu in nu_values:
        an, mc, se = [], [], []
        for K in k_values:
            an.append(analytic.mean_rho_student(N, K, nu))
            params = ScenarioParams(N, K, nu)
            blocks = map_blocks(rep_sampler("rho", params), trials, seed, f"mean:{N}:{K}:{nu}",
                                workers)
            x = np.concatenate(blocks)
            mc.append(float(x.mean()))
            se.append(float(x.std(ddof=1) / math.sqrt(x.size)))
        table.add(f"analytic_nu{nu}", an)
        table.add(f"mc_nu{nu}", mc)
        table.add(f"mc_se_nu{nu}", se)
    table.notes.update(N=N, trials=trials, seed=seed)
    return table


def find_k_for_half_loss(N: int, nu=None, target: float = 0.5, k_cap: int = 100_000) -> int:
    """Smallest ``K >= N`` with mean SNR loss at least ``target``.

    ``nu=None`` (or ``inf``) is the Gaussian reference, taken as the limit of
    the Student answer as ``nu`` grows. Student means lie strictly below the
    Gaussian one, so the limit is the smallest K whose Gaussian mean strictly
    exceeds the target.
    """
    if nu is None or math.isinf(nu):
        for K in range(N, k_cap + 1):
            if analytic.mean_rho_gaussian(N, K) > target:
                return K
        raise LookupError(f"no K <= {k_cap} reaches mean {target}")

    def ok(K):
        return analytic.mean_rho_student(N, K, nu) >= target

    if ok(N):
        return N
    lo, step = N, 1
    hi = None
    # exponential search then bisection; the mean is nondecreasing in K
    while hi is None:
        cand = min(lo + step, k_cap)
        if ok(cand):
            hi = cand
        elif cand == k_cap:
            raise LookupError(f"no K <= {k_cap} reaches mean {target} for nu={nu}")
        else:
            lo, step = cand, step * 2
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if ok(mid):
            hi = mid
        else:
            lo = mid
    return hi


def generate_fig_find_k(N: int, nu_values: Sequence[int], target: float = 0.5) -> Table:
    table = Table()
    nus = list(nu_values)
    table.add("nu", nus + ["inf"])
    ks = [find_k_for_half_loss(N, nu, target) for nu in nus]
    ks.append(find_k_for_half_loss(N, None, target))
    table.add("K", ks)
    table.add("mean_at_K", [analytic.mean_rho_student(N, k, float(nu)) for nu, k in zip(nus + [math.inf], ks)])
    table.notes.update(N=N, target=target)
    return table


def _exceed_block(sampler, eta, stream, n):
    return np.count_nonzero(sampler(stream, n) > eta)


def pfa_mc(params: ScenarioParams, eta: float, trials: int, seed: int, workers: int = 1,
           variant=None) -> tuple[float, float]:
    """MC estimate of ``P(t~ > eta)`` under H0 and its standard error."""
    sampler = rep_sampler("t_tilde", params, "H0", variant or represent.DEFAULT_TTILDE_VARIANT)
    tag = f"pfa:{params.N}:{params.K}:{params.nu}:{params.scale!r}:{eta!r}"
    hits = sum(map_blocks(partial(_exceed_block, sampler, eta), trials, seed, tag, workers))
    p = hits / trials
    return p, math.sqrt(max(p * (1 - p), 1.0 / trials) / trials)


def generate_fig_pfa(N: int, k_values: Sequence[int], nu_values: Sequence[int],
                     pfa: float = 1e-3, trials: int = 10_000_000, seed: int = 0, mu=None,
                     workers: int = 1) -> Table:
    """False-alarm rate of Kelly's statistic with Student training.

    The threshold is calibrated for ``pfa`` with Gaussian training. Columns:
    ``nu``, then per K ``eta_K<K>``, ``pfa_K<K>``, ``pfa_se_K<K>`` and the
    Gaussian sanity check ``gauss_pfa_K<K>``/``gauss_pfa_se_K<K>`` (same
    threshold, Gaussian training).
    """
    table = Table()
    nus = list(nu_values)
    table.add("nu", nus)
    for K in k_values:
        eta = analytic.gaussian_pfa_threshold(pfa, N, K)
        est = [pfa_mc(ScenarioParams(N, K, nu, mu), eta, trials, seed, workers) for nu in nus]
        g, g_se = pfa_mc(ScenarioParams(N, K, None), eta, trials, seed, workers)
        table.add(f"eta_K{K}", [eta] * len(nus))
        table.add(f"pfa_K{K}", [e[0] for e in est])
        table.add(f"pfa_se_K{K}", [e[1] for e in est])
        table.add(f"gauss_pfa_K{K}", [g] * len(nus))
        table.add(f"gauss_pfa_se_K{K}", [g_se] * len(nus))
    table.notes.update(N=N, target_pfa=pfa, trials=trials, seed=seed)
    return table
