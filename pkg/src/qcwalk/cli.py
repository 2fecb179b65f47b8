"""Command-line entry point: ``qcwalk run|asymptotes|check``.

Exit codes: 0 success, 2 bad config or input, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .errors import InvalidArgument, NumericalFailure
from .experiment import (emit_asymptote_table, format_check_report, check_graph_report,
                         graph_from_cli, load_config, run_experiment)

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3

log = logging.getLogger("qcwalk")


def _cmd_run(args) -> int:
    cfg = load_config(args.config)
    manifest = run_experiment(cfg)
    log.info("wrote %d files to %s", len(manifest["outputs"]), cfg.output_dir)
    print(json.dumps({"output_dir": cfg.output_dir, "config_hash": manifest["config_hash"],
                      "outputs": manifest["outputs"]}, indent=1))
    return EXIT_OK


def _cmd_asymptotes(args) -> int:
    if args.n_min > args.n_max:
        raise InvalidArgument("--n-min must not exceed --n-max")
    text = emit_asymptote_table(args.family, args.n_min, args.n_max)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _cmd_check(args) -> int:
    g = graph_from_cli(args.graph, args.family, args.n)
    rep = check_graph_report(g)
    print(json.dumps(rep, indent=1) if args.json else format_check_report(rep))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qcwalk", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run an experiment config (JSON)")
    r.add_argument("config")
    r.set_defaults(func=_cmd_run)

    a = sub.add_parser("asymptotes", help="closed-form intrinsic-decoherence asymptotes")
    a.add_argument("--family", action="append", required=True,
                   choices=["complete", "cycle", "star"])
    a.add_argument("--n-min", type=int, default=2)
    a.add_argument("--n-max", type=int, required=True)
    a.add_argument("--out", help="write CSV here instead of stdout")
    a.set_defaults(func=_cmd_asymptotes)

    c = sub.add_parser("check", help="spectrum, degeneracy and automorphism report")
    c.add_argument("graph", nargs="?", help="graph JSON file")
    c.add_argument("--family")
    c.add_argument("--n", type=int)
    c.add_argument("--json", action="store_true")
    c.set_defaults(func=_cmd_check)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except NumericalFailure as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except InvalidArgument as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
