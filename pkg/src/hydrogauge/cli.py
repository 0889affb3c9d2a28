"""Command line: ``hydrogauge scenario|basis|matel``.

Exit codes: 0 ok, 2 usage error (including an unknown scenario id; nothing is
written), 3 config schema violation, 4 accuracy-check failure (summary.json
marks the failure).
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .basis import BasisSpec, build_basis, enumerate_states
from .errors import AccuracyError, ConfigurationError
from .io import write_csv
from .operators import PrimitiveOperator, primitive_matrix
from .scenarios import SCENARIO_IDS, load_config, run_scenario, write_failure

EXIT_OK, EXIT_USAGE, EXIT_CONFIG, EXIT_ACCURACY = 0, 2, 3, 4


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hydrogauge", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("scenario", help="run one of the named experiments S1..S6")
    s.add_argument("id", help="scenario id (" + ", ".join(SCENARIO_IDS) + ")")
    s.add_argument("--config", type=Path, default=None, help="JSON overrides on top of the committed defaults")
    s.add_argument("--out", type=Path, default=None, help="output directory (default: results/<id>)")

    b = sub.add_parser("basis", help="dump the basis as CSV (n, l, m, energy)")
    b.add_argument("--n-max", type=int, default=5)
    b.add_argument("--Z", type=float, default=1.0)
    b.add_argument("--out", type=Path, required=True)

    m = sub.add_parser("matel", help="dump a primitive-operator matrix as CSV")
    m.add_argument("--op", required=True, help="primitive, e.g. z, p_x, x*p_y, x*x, identity")
    m.add_argument("--n-max", type=int, default=3)
    m.add_argument("--Z", type=float, default=1.0)
    m.add_argument("--out", type=Path, required=True)
    return p


def _scenario(args) -> int:
    if args.id not in SCENARIO_IDS:
        print(f"error: unknown scenario id {args.id!r}; expected one of {', '.join(SCENARIO_IDS)}", file=sys.stderr)
        return EXIT_USAGE
    try:
        cfg = load_config(args.id, args.config)
    except ConfigurationError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    out = args.out or Path(cfg.get("output_dir", f"results/{args.id}"))
    try:
        report = run_scenario(args.id, cfg)
    except AccuracyError as err:
        write_failure(out, args.id, err, cfg, "accuracy")
        print(f"accuracy check failed: {err}", file=sys.stderr)
        return EXIT_ACCURACY
    except ConfigurationError as err:
        write_failure(out, args.id, err, cfg, "configuration")
        print(f"error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    paths = report.write(out)
    for path in paths:
        print(path)
    return EXIT_OK


def _basis(args) -> int:
    try:
        states = enumerate_states(BasisSpec(n_max=args.n_max, Z=args.Z))
    except ValueError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_USAGE
    write_csv(args.out, ("n", "l", "m", "energy"), [(s.qn.n, s.qn.l, s.qn.m, s.energy) for s in states])
    print(args.out)
    return EXIT_OK


def _matel(args) -> int:
    try:
        op = PrimitiveOperator.parse(args.op)
        basis = build_basis(BasisSpec(n_max=args.n_max, Z=args.Z))
    except ValueError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_USAGE
    M = primitive_matrix(op, basis)
    rows = []
    for i, a in enumerate(basis.labels):
        for j, b in enumerate(basis.labels):
            rows.append((a.n, a.l, a.m, b.n, b.l, b.m, M[i, j].real, M[i, j].imag))
    write_csv(args.out, ("n_a", "l_a", "m_a", "n_b", "l_b", "m_b", "re", "im"), rows)
    print(args.out)
    return EXIT_OK


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    return {"scenario": _scenario, "basis": _basis, "matel": _matel}[args.command](args)


if __name__ == "__main__":
    sys.exit(main())
