"""skewseries command line: validate instance documents and run check suites.

Exit codes: 0 all checks pass, 1 validation error, 2 property violation.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict

from .instances import BUILTINS, load_instance
from .ringcore import RingError
from .skewalg import SkewError, check_sigma_nilpotent
from .suites import SUITES, run_suite

EXIT_OK, EXIT_INVALID, EXIT_VIOLATION = 0, 1, 2
VALIDATION_ERRORS = (RingError, SkewError, ValueError, KeyError, TypeError, OSError, json.JSONDecodeError)


def _load(ref: str, t_prec: int | None, p_prec: int | None):
    for flag, value in (("--t-prec", t_prec), ("--p-prec", p_prec)):
        if value is not None and value < 1:
            raise ValueError(f"{flag} must be positive, got {value}")
    overrides = {}
    if t_prec is not None:
        overrides["t_precision"] = t_prec
    if p_prec is not None:
        overrides["p_precision"] = p_prec
    if ref.upper() in BUILTINS:
        return load_instance(ref, **overrides)
    inst = load_instance(ref)
    if overrides:
        spec = inst.spec
        if p_prec is not None:
            spec.ring = dict(spec.ring, p_precision=p_prec)
        if t_prec is not None:
            spec.t_precision = t_prec
        from .instances import instance_from_spec
        inst = instance_from_spec(spec, inst.name)
    return inst


def cmd_validate(args) -> int:
    try:
        inst = load_instance(args.spec)
    except VALIDATION_ERRORS as e:
        print(json.dumps({"valid": False, "error": str(e)}, sort_keys=True))
        return EXIT_INVALID
    S = inst.skew
    nil = check_sigma_nilpotent(S, S.base.nilpotency_index)
    summary = {"valid": True, "name": inst.name, "rank": S.base.rank, "p": S.base.p,
               "p_precision": S.base.n, "sigma_order": S.sigma_order, "commuting": S.commuting,
               "sigma_nilpotent": nil.nilpotent, "nilpotence": nil.as_dict()}
    print(json.dumps(summary, sort_keys=True, default=str))
    return EXIT_OK if nil.nilpotent else EXIT_VIOLATION


def cmd_run(args) -> int:
    from .report import write_report

    try:
        inst = _load(args.instance, args.t_prec, args.p_prec)
    except VALIDATION_ERRORS as e:
        print(f"invalid instance: {e}", file=sys.stderr)
        return EXIT_INVALID
    result = run_suite(args.suite, inst, args.seed, args.t_prec)
    spec = asdict(inst.spec)
    report = write_report(result, spec, args.out, figures=not args.no_figures)
    counts = report["summary"]
    print(f"{args.suite} on {inst.name}: {counts['pass']} pass, {counts['fail']} fail, "
          f"{counts['info']} info, {counts['skip']} skip -> {args.out}")
    for rec in report["records"]:
        if rec["status"] == "fail":
            print(f"  FAIL {rec['name']}: {rec['witness']}")
    return EXIT_OK if not result.failed else EXIT_VIOLATION


class _Parser(argparse.ArgumentParser):
    # bad arguments are validation errors (exit 1), not property violations (exit 2)
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="skewseries", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    v = sub.add_parser("validate", help="validate an instance document")
    v.add_argument("spec", help="path to an instance JSON document or a built-in name")
    v.set_defaults(func=cmd_validate)
    r = sub.add_parser("run", help="run a check suite and write a JSON report with figures")
    r.add_argument("--suite", required=True, choices=SUITES + ("all",))
    r.add_argument("--instance", required=True, help=f"built-in ({', '.join(BUILTINS)}) or JSON path")
    r.add_argument("--seed", type=int, required=True)
    r.add_argument("--t-prec", type=int, default=None)
    r.add_argument("--p-prec", type=int, default=None)
    r.add_argument("--out", required=True)
    r.add_argument("--no-figures", action="store_true", help="skip the PNG figures")
    r.set_defaults(func=cmd_run)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
