"""Command-line entry point: ``amfstudent <subcommand> [options]``.

Exit codes: 0 success, 1 argument error, 2 numerical failure, 3 verify failure.
"""
from __future__ import annotations

import argparse
import sys

import numpy as np

from .. import analytic
from ..matvar import NotPositiveDefiniteError
from . import figures
from .verify import VerifyConfig, verify_suite

EXIT_OK, EXIT_ARGS, EXIT_NUMERIC, EXIT_VERIFY = 0, 1, 2, 3

CDF_COLUMNS = """\
CSV columns: value, then for every curve label (K<K>_nu<nu> or K<K>_gauss):
  cdf_<label>, cdf_se_<label>, pdf_<label> (histogram density)
  pdf_analytic_<label> (snr-loss only); direct_* columns when --path is direct/both."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ARGS, f"{self.prog}: error: {message}\n")


def _int_list(text: str) -> list[int]:
    try:
        vals = [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected int or comma list, got {text!r}") from None
    if not vals:
        raise argparse.ArgumentTypeError("empty list")
    return vals


def _mu(text: str):
    if text.replace(" ", "") in ("nu-N", "nu-n"):
        return None
    try:
        val = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError("--mu must be a positive number or 'nu-N'") from None
    if val <= 0:
        raise argparse.ArgumentTypeError("--mu must be positive")
    return val


def _common(p: argparse.ArgumentParser, trials: int, k_default=None, nu_default=None):
    p.add_argument("--n", type=int, default=16, help="number of channels N (default 16)")
    p.add_argument("--k", type=_int_list, default=k_default,
                   help="training size K, int or comma list")
    p.add_argument("--nu", type=_int_list, default=nu_default,
                   help="t-distribution parameter nu, int or comma list")
    p.add_argument("--mu", type=_mu, default=None, help="scale mu (default 'nu-N')")
    p.add_argument("--snr-bar", type=float, default=0.0, help="|alpha|^2 v^H Sigma^-1 v")
    p.add_argument("--trials", type=int, default=trials)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--path", choices=("direct", "rep", "both"), default="rep")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", default=None, help="output file (default stdout)")
    p.add_argument("--format", choices=("csv", "json"), default="csv")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="amfstudent", description=__doc__,
                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    for name, stat in (("snr-loss", "rho"), ("beta", "beta"), ("ttilde", "t_tilde")):
        p = sub.add_parser(name, help=f"CDF/pdf table of {stat}", epilog=CDF_COLUMNS,
                           formatter_class=argparse.RawDescriptionHelpFormatter)
        _common(p, 1_000_000)
        p.add_argument("--hypothesis", choices=("H0", "H1"), default="H0")
        p.add_argument("--points", type=int, default=201, help="grid points")
        p.add_argument("--no-gaussian", action="store_true", help="omit Gaussian reference")
        p.set_defaults(statistic=stat)

    p = sub.add_parser("mean-vs-k", help="E[rho] versus K",
                       epilog="CSV columns: K, gaussian, analytic_nu<nu>, mc_nu<nu>, mc_se_nu<nu>")
    _common(p, 1_000_000)

    p = sub.add_parser("find-k", help="smallest K with E[rho] >= 0.5",
                       epilog="CSV columns: nu ('inf' = Gaussian), K, mean_at_K")
    _common(p, 1)
    p.add_argument("--target", type=float, default=0.5)

    p = sub.add_parser("pfa", help="Pfa of Kelly's test with Student training",
                       epilog="CSV columns: nu, then per K: eta_K<K>, pfa_K<K>, pfa_se_K<K>, "
                              "gauss_pfa_K<K>, gauss_pfa_se_K<K>")
    _common(p, 10_000_000)
    p.add_argument("--pfa", type=float, default=1e-3, help="Gaussian-calibrated target Pfa")

    p = sub.add_parser("verify", help="run the cross-validation suite")
    _common(p, 100_000, k_default=[32], nu_default=[32])
    p.add_argument("--snr", type=float, default=10.0, help="snr_bar for H1 checks")
    return parser


def _run(args) -> int:
    N = args.n
    if args.trials < 1:
        raise ValueError("--trials must be >= 1")
    cmd = args.command
    if cmd in ("snr-loss", "beta", "ttilde"):
        ks = args.k or [2 * N]
        nus = args.nu or figures.default_nu_grid(N)
        table = figures.generate_fig_cdf(
            args.statistic, N, ks, nus, args.trials, args.seed, mu=args.mu,
            snr_bar=args.snr_bar, hypothesis=args.hypothesis, points=args.points,
            path=args.path, include_gaussian=not args.no_gaussian, workers=args.workers)
    elif cmd == "mean-vs-k":
        ks = args.k or list(range(N + 4, 8 * N + 1, 4))
        nus = args.nu or figures.default_nu_grid(N)
        table = figures.generate_fig_mean_vs_k(N, ks, nus, args.trials, args.seed, args.workers)
    elif cmd == "find-k":
        nus = args.nu or list(range(N + 2, 10 * N + 1, 2))
        table = figures.generate_fig_find_k(N, nus, args.target)
    elif cmd == "pfa":
        ks = args.k or [2 * N, 4 * N]
        nus = args.nu or figures.default_pfa_nu_grid(N)
        table = figures.generate_fig_pfa(N, ks, nus, args.pfa, args.trials, args.seed, args.mu,
                                         args.workers)
    elif cmd == "verify":
        cfg = VerifyConfig(N=N, K=args.k[0], nu=args.nu[0], trials=args.trials, seed=args.seed,
                           snr_bar=args.snr, workers=args.workers,
                           grid=[(k, v) for k in args.k for v in args.nu][1:])
        report = verify_suite(cfg)
        text = report.text() + "\n"
        if args.out:
            with open(args.out, "w", encoding="utf-8") as fh:
                fh.write(text)
        sys.stdout.write(text)
        return EXIT_OK if report.passed else EXIT_VERIFY
    else:  # pragma: no cover
        raise AssertionError(cmd)
    text = figures.write_table(table, args.out, args.format)
    if args.out is None:
        sys.stdout.write(text)
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _run(args)
    # LinAlgError subclasses ValueError, so it must be caught first
    except (analytic.ConvergenceError, NotPositiveDefiniteError, np.linalg.LinAlgError,
            ArithmeticError) as exc:
        print(f"amfstudent: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ValueError, LookupError) as exc:
        print(f"amfstudent: error: {exc}", file=sys.stderr)
        return EXIT_ARGS


if __name__ == "__main__":
    sys.exit(main())
