"""Command-line entry point: ``dimcons run`` and ``dimcons self-test``."""
from __future__ import annotations

import argparse
import json
import sys
from typing import List, Optional

from .config import ExperimentConfig
from .errors import ConfigError, DimconsError


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="dimcons", description="Dimension conservation experiments on free-group products.")
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one experiment from a JSON config")
    run.add_argument("--config", required=True, help="path to the experiment JSON")
    run.add_argument("--seed", type=int, help="override the config seed")
    run.add_argument("--out", help="override the output directory")
    run.add_argument("--trials", type=int, help="override the trial count")

    st = sub.add_parser("self-test", help="run the built-in verification suites")
    st.add_argument("--level", choices=("fast", "full"), default="fast")
    st.add_argument("--seed", type=int, default=0)
    st.add_argument("--inject", choices=("cylinder-exponent",), help="deliberately corrupt a routine (for testing the tests)")
    return p


def _run(args) -> int:
    from .runner import run_experiment

    try:
        cfg = ExperimentConfig.load(args.config)
        over = {k: getattr(args, k) for k in ("seed", "out", "trials") if getattr(args, k) is not None}
        if over:
            cfg = ExperimentConfig.from_dict({**cfg.to_dict(), **over})
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return 2
    except ConfigError as exc:
        print(f"config error in field '{exc.field}': {exc}", file=sys.stderr)
        return 2
    try:
        table = run_experiment(cfg)
    except DimconsError as exc:
        print(f"error in {cfg.experiment}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    print(json.dumps(table.summary, indent=2, sort_keys=True, default=str))
    if cfg.experiment == "self-test" and not table.summary.get("passed", False):
        return 1
    return 0


def _self_test(args) -> int:
    from .selftest import run_self_test

    results = run_self_test(args.level, args.inject, args.seed, report=lambda r: print(r.line(), flush=True))
    failed = sum(not r.passed for r in results)
    print(f"{len(results) - failed}/{len(results)} checks passed")
    return 1 if failed else 0


def main(argv: Optional[List[str]] = None) -> int:
    args = _parser().parse_args(argv)
    if args.command == "run":
        return _run(args)
    return _self_test(args)


if __name__ == "__main__":
    sys.exit(main())
