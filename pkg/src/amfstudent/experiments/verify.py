"""Cross-validation suite: two-path agreement, closed forms, block laws."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import integrate

from .. import analytic, matvar, represent
from ..adaptive import ScenarioParams
from .montecarlo import EmpiricalDistribution, RunConfig, ks_distance, run_monte_carlo, stream_for

__all__ = ["Check", "VerifyConfig", "VerifyReport", "verify_suite", "choose_ttilde_variant"]


@dataclass(frozen=True)
class Check:
    name: str
    value: float
    threshold: float
    relation: str = "<"

    @property
    def passed(self) -> bool:
        if not np.isfinite(self.value):
            return False
        if self.relation == "<":
            return self.value < self.threshold
        return self.value > self.threshold

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status}  {self.name:<58s} {self.value:.6g} {self.relation} {self.threshold:g}"


@dataclass
class VerifyConfig:
    N: int = 16
    K: int = 32
    nu: int = 32
    trials: int = 100_000
    seed: int = 0
    snr_bar: float = 10.0
    ks_tol: float = 0.01
    # extra (K, nu) pairs for the two-path checks
    grid: Sequence[tuple[int, int]] = ()
    block_trials: int = 100_000
    workers: int = 1


@dataclass
class VerifyReport:
    checks: list[Check] = field(default_factory=list)
    variant_decision: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def text(self) -> str:
        lines = [c.line() for c in self.checks]
        d = self.variant_decision
        if d:
            ks = ", ".join(f"{k}={v:.4g}" for k, v in d["ks"].items())
            lines.append(f"t~ representation variant: {d['chosen']} (KS vs direct: {ks})")
        lines.append(f"{sum(c.passed for c in self.checks)}/{len(self.checks)} checks passed")
        return "\n".join(lines)


def choose_ttilde_variant(direct_t: EmpiricalDistribution, params: ScenarioParams, trials: int,
                          seed: int, hypothesis: str = "H0") -> dict:
    """KS of each t~ variant against direct-path draws; smallest wins."""
    snr = params.snr_bar if hypothesis == "H1" else 0.0
    ks = {}
    for i, variant in enumerate(represent.TTILDE_VARIANTS):
        stream = stream_for(seed, f"variant:{variant}", i)
        rep = represent.draw_ttilde_student(params.N, params.K, params.nu, params.scale, snr,
                                            stream, trials, variant=variant)
        ks[variant] = ks_distance(direct_t, EmpiricalDistribution(rep.value))
    return {"chosen": min(ks, key=ks.get), "ks": ks}


def _two_path(cfg: VerifyConfig, K: int, nu: int, report: VerifyReport, variant: str):
    for hyp in ("H0", "H1"):
        params = ScenarioParams(cfg.N, K, nu, None, cfg.snr_bar)
        run = run_monte_carlo(RunConfig(params, cfg.trials, cfg.seed, "both", hyp,
                                        ttilde_variant=variant, workers=cfg.workers))
        stats = ("rho", "beta", "t_tilde") if hyp == "H0" else ("t_tilde",)
        for s in stats:
            ks = ks_distance(run["direct"][s], run["rep"][s])
            report.checks.append(Check(f"two-path KS {s} {hyp} N={cfg.N} K={K} nu={nu}", ks,
                                       cfg.ks_tol))


def _normalizations(cfg: VerifyConfig, report: VerifyReport):
    N, K, nu = cfg.N, cfg.K, cfg.nu

    def total(fn, a=0.0, b=1.0):
        return integrate.quad(fn, a, b, epsabs=0, epsrel=1e-10, limit=200)[0]

    report.checks.append(Check("normalization pdf_rho_student",
                               abs(total(lambda r: analytic.pdf_rho_student(r, N, K, nu)) - 1), 1e-6))
    report.checks.append(Check("normalization pdf_rho_given_f1 (f1=2)",
                               abs(total(lambda r: float(analytic.pdf_rho_given_f1(r, 2.0, N, K))) - 1),
                               1e-8))
    report.checks.append(Check("normalization pdf_f22",
                               abs(total(lambda f: float(analytic.pdf_f22(f, N, nu, K)), 0, np.inf) - 1),
                               1e-8))
    report.checks.append(Check("normalization pdf_f2",
                               abs(total(lambda f: float(analytic.pdf_f2(f, N, K)), 0, np.inf) - 1),
                               1e-8))
    report.checks.append(Check("normalization pdf_t12 (p=4, q=8, n=16)",
                               abs(total(lambda u: float(analytic.pdf_t12_norm_sq(u, 4, 8, 16)), 0,
                                         np.inf) - 1), 1e-5))


def _means(cfg: VerifyConfig, report: VerifyReport):
    N, K, nu = cfg.N, cfg.K, cfg.nu
    closed = analytic.mean_rho_student(N, K, nu)
    quad = analytic.mean_rho_student_by_quadrature(N, K, nu)
    mc = represent.draw_rho_student(N, K, nu, stream_for(cfg.seed, "verify-mean", 0),
                                    max(cfg.trials, 10**6)).value.mean()
    report.checks.append(Check("E[rho] closed form vs quadrature", abs(closed - quad), 1e-8))
    report.checks.append(Check("E[rho] closed form vs MC", abs(closed - mc), 0.003))


def _block_laws(cfg: VerifyConfig, report: VerifyReport):
    p, r, q, n = 3, 2, 8, 12
    m = cfg.block_trials
    f = matvar.sample_complex_f(p, q, n, stream_for(cfg.seed, "verify-F", 0), m)
    pf = matvar.partition_f(f, r)
    f12 = matvar.schur_f(pf)
    tr12 = np.real(np.trace(f12, axis1=-2, axis2=-1))
    f22 = np.real(pf.F22[..., 0, 0])
    ref = matvar.sample_complex_f(r, q - (p - r), n, stream_for(cfg.seed, "verify-F", 1), m)
    tr_ref = np.real(np.trace(ref, axis1=-2, axis2=-1))
    report.checks.append(Check("block law KS tr(F1.2) vs CF_r(q-s, n)",
                               ks_distance(EmpiricalDistribution(tr12), EmpiricalDistribution(tr_ref)),
                               0.015))
    ranks = [np.argsort(np.argsort(x)) for x in (tr12, f22)]
    corr = abs(np.corrcoef(*ranks)[0, 1])
    report.checks.append(Check("block law |rank corr(tr F1.2, F22)|", corr, 0.01))
    chi = represent.draw_f22(p, n, q, stream_for(cfg.seed, "verify-F", 2), m)
    report.checks.append(Check("block law KS F22 vs Cchi2_q/Cchi2_{n-p+1}",
                               ks_distance(EmpiricalDistribution(f22), EmpiricalDistribution(chi)),
                               0.015))


def _mutation(cfg: VerifyConfig, direct_rho: EmpiricalDistribution, report: VerifyReport):
    # drop the (1 + 1/F22) factor: must be detected
    N, K, nu = cfg.N, cfg.K, cfg.nu
    stream = stream_for(cfg.seed, "verify-mutation", 0)
    f22 = represent.draw_f22(N, K, nu, stream, cfg.trials)
    t12 = represent.draw_t12_given_f22(N, K, f22, stream)
    norm = np.sum(np.abs(t12) ** 2, axis=-1) / (1.0 + 1.0 / f22)
    mutated = EmpiricalDistribution(1.0 / (1.0 + norm))
    report.checks.append(Check("mutation (no (1+1/F22) factor) detected: KS",
                               ks_distance(direct_rho, mutated), 0.05, ">"))


def verify_suite(cfg: VerifyConfig | None = None) -> VerifyReport:
    cfg = cfg or VerifyConfig()
    report = VerifyReport()
    base = ScenarioParams(cfg.N, cfg.K, cfg.nu, None, cfg.snr_bar)
    run0 = run_monte_carlo(RunConfig(base, cfg.trials, cfg.seed, "direct", "H0",
                                     workers=cfg.workers))
    decision = choose_ttilde_variant(run0["direct"]["t_tilde"], base, cfg.trials, cfg.seed)
    report.variant_decision = decision
    for K, nu in [(cfg.K, cfg.nu), *cfg.grid]:
        _two_path(cfg, K, nu, report, decision["chosen"])
    _mutation(cfg, run0["direct"]["rho"], report)
    _normalizations(cfg, report)
    _means(cfg, report)
    _block_laws(cfg, report)
    return report
