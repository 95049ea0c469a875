"""Command line entry point: ``gauss-ts {run,verify,separation}``.

Exit codes: 0 success, 1 configuration error, 2 runtime error, 3 a verified
inequality failed.
"""
from __future__ import annotations

import argparse
import logging
import math
import os
import sys
from pathlib import Path

from ..errors import ConfigError
from . import verify
from .config import load_spec
from .experiments import run_experiment, run_separation

log = logging.getLogger("gauss_ts")

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME, EXIT_VERIFY = 0, 1, 2, 3
OUT_ENV = "GAUSS_TS_OUT"


class _Parser(argparse.ArgumentParser):
    """Usage errors are configuration errors (exit 1), not argparse's 2."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: config error: {message}\n")


_VALUE_FLAGS = ("--alphas", "--known-mu", "--known-sigma2")


def _glue_negative_values(argv: list[str]) -> list[str]:
    # "--alphas -0.5,0.5" would otherwise be read as an unknown option
    out = []
    it = iter(argv)
    for tok in it:
        if tok in _VALUE_FLAGS:
            nxt = next(it, None)
            if nxt is not None and nxt.startswith("-") and nxt[1:2] in set("0123456789."):
                out.append(f"{tok}={nxt}")
                continue
            out.append(tok)
            if nxt is not None:
                out.append(nxt)
            continue
        out.append(tok)
    return out


def _common(suppress: bool) -> argparse.ArgumentParser:
    # Added both to the top-level parser and each verb, so the options may
    # appear before or after the verb.
    default = argparse.SUPPRESS if suppress else None
    p = _Parser(add_help=False)
    p.add_argument("--jobs", type=int, default=default, help="worker threads (default: CPU count)")
    p.add_argument("--out", default=default, help=f"output directory (default: ${OUT_ENV} or ./results)")
    p.add_argument("--backend", choices=("numba", "numpy"), default=default)
    p.add_argument("-v", "--verbose", action="store_true", default=default)
    return p


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="gauss-ts",
        description="Thompson sampling experiments for Gaussian bandits with unknown variances.",
        parents=[_common(False)],
    )
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    common = _common(True)

    p_run = sub.add_parser("run", parents=[common], help="run an experiment spec (TOML or manifest JSON)")
    p_run.add_argument("spec", help="spec file")

    p_ver = sub.add_parser("verify", parents=[common], help="numerical checks of the analysis inequalities")
    p_ver.add_argument("suite", choices=verify.SUITES + ("all",))
    p_ver.add_argument("--seed", type=int, default=1)
    p_ver.add_argument("--trials", type=int, default=1_000_000, help="Monte Carlo trials per cell (lemma2)")
    p_ver.add_argument(
        "--debug-bound-divisor",
        type=float,
        default=1.0,
        help="divide the large-deviation bounds by this factor (negative control)",
    )
    p_ver.add_argument("--all-rows", action="store_true", help="print passing rows too")

    p_sep = sub.add_parser("separation", parents=[common], help="prior-exponent separation sweep")
    p_sep.add_argument("--alphas", required=True, help="comma-separated prior exponents")
    p_sep.add_argument("--horizon", type=int, default=100_000)
    p_sep.add_argument("--reps", type=int, default=2000)
    p_sep.add_argument("--seed", type=int, default=7)
    p_sep.add_argument("--known-mu", type=float, default=-0.5)
    p_sep.add_argument("--known-sigma2", default="1", help="comma-separated variances of the given arm")
    return parser


def _floats(text: str, field: str) -> list[float]:
    items = [s.strip() for s in text.split(",") if s.strip()]
    if not items:
        raise ConfigError(f"{field} must list at least one value")
    try:
        values = [float(s) for s in items]
    except ValueError:
        raise ConfigError(f"{field}: cannot parse {text!r} as numbers") from None
    if not all(math.isfinite(v) for v in values):
        raise ConfigError(f"{field} values must be finite")
    return values


def resolve_out(args, spec_dir: str | None = None) -> Path:
    if args.out:
        return Path(args.out)
    if os.environ.get(OUT_ENV):
        return Path(os.environ[OUT_ENV])
    return Path(spec_dir or "results")


def resolve_jobs(args) -> int:
    if args.jobs is None:
        return os.cpu_count() or 1
    if args.jobs < 1:
        raise ConfigError("--jobs must be ≥ 1")
    return args.jobs


def cmd_run(args) -> int:
    spec = load_spec(args.spec)
    jobs = resolve_jobs(args)
    out_dir = resolve_out(args, spec.out_dir)
    result, paths = run_experiment(spec, out_dir, jobs, args.backend)
    T = int(result.checkpoints[-1])
    print(
        f"{spec.name}: T={T} reps={result.reps} mean_regret={result.mean[-1]:.4f} "
        f"(stderr {result.stderr[-1]:.4f}) regret/lnT={result.mean[-1] / math.log(T):.4f}"
    )
    print(f"wrote {paths['summary']}")
    return EXIT_OK


def cmd_verify(args) -> int:
    if args.trials < 1:
        raise ConfigError("--trials must be ≥ 1")
    if not args.debug_bound_divisor > 0.0:
        raise ConfigError("--debug-bound-divisor must be > 0")
    checks = verify.run_suite(args.suite, args.seed, args.trials, args.debug_bound_divisor)
    failed = [c for c in checks if not c.passed]
    print(f"{'suite':<10} {'status':<6} {'observed':>14} {'bound':>14} {'margin':>14}  point")
    for c in checks:
        if args.all_rows or not c.passed:
            status = "pass" if c.passed else "FAIL"
            print(f"{c.suite:<10} {status:<6} {c.observed:>14.6g} {c.bound:>14.6g} {c.margin:>14.6g}  {c.point}")
    by_suite = {}
    for c in checks:
        tot, bad, worst = by_suite.get(c.suite, (0, 0, math.inf))
        by_suite[c.suite] = (tot + 1, bad + (not c.passed), min(worst, c.margin))
    for suite, (tot, bad, worst) in by_suite.items():
        print(f"{suite}: {tot - bad}/{tot} pass, smallest margin {worst:.6g}")
    return EXIT_VERIFY if failed else EXIT_OK


def cmd_separation(args) -> int:
    alphas = _floats(args.alphas, "--alphas")
    sigma2s = _floats(args.known_sigma2, "--known-sigma2")
    if args.horizon < 1:
        raise ConfigError("--horizon must be ≥ 1")
    if args.reps < 1:
        raise ConfigError("reps must be ≥ 1")
    if not 0 <= args.seed < 2**64:
        raise ConfigError("--seed must lie in [0, 2**64)")
    if any(not s > 0.0 for s in sigma2s):
        raise ConfigError("--known-sigma2 values must be > 0")
    if not args.known_mu < 0.0:
        raise ConfigError("--known-mu must be < 0 so the unknown arm is optimal")
    out_dir = resolve_out(args)
    rows = run_separation(
        alphas, args.horizon, args.reps, args.seed, out_dir, args.known_mu, sigma2s,
        resolve_jobs(args), args.backend,
    )
    print(f"{'alpha':>7} {'sigma2':>8} {'exponent':>9} {'lower_coef':>11} {'regret/lnT':>11}")
    for r in rows:
        T = int(r.result.checkpoints[-1])
        print(
            f"{r.alpha:>7g} {r.known_sigma2:>8g} {r.exponent:>9.4f} {r.lower_coef:>11.4f} "
            f"{r.result.mean[-1] / math.log(T):>11.4f}"
        )
    print(f"wrote {out_dir / 'separation_summary.csv'}")
    return EXIT_OK


COMMANDS = {"run": cmd_run, "verify": cmd_verify, "separation": cmd_separation}


def main(argv=None) -> int:
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    args = parser.parse_args(_glue_negative_values(argv))
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001 - any failure past validation is a runtime error
        log.debug("runtime failure", exc_info=True)
        print(f"runtime error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
