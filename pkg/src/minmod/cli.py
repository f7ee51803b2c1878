"""Command-line entry point: ``minmod <command> [options]``.

Exit codes: 0 success, 1 a check failed, 2 invalid input, 3 non-convergence.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from typing import Any, Optional, Sequence

from . import classifier, gallery, moduli
from . import operators as ops
from . import sequences as seq
from . import spaces as sp
from .errors import FunctionalNotFound, InvalidInput, NonConvergent, NotInCatalog
from .modulus import SolverConfig, attainify, min_modulus

EXIT_OK, EXIT_CHECK, EXIT_INPUT, EXIT_NONCONV = 0, 1, 2, 3
SIG = 12


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def __init__(self, *a, **kw):
        kw.setdefault("allow_abbrev", False)
        super().__init__(*a, **kw)

    def error(self, message):
        raise _UsageError(f"{self.prog}: {message}")


# ---------------------------------------------------------------- output

def _num(x: Any) -> Any:
    """Round floats to 12 significant digits; non-finite values become strings."""
    if isinstance(x, bool) or x is None or isinstance(x, (int, str)):
        return x
    if isinstance(x, float):
        if not math.isfinite(x):
            return "nan" if math.isnan(x) else ("inf" if x > 0 else "-inf")
        return float(f"{x:.{SIG}g}")
    if isinstance(x, dict):
        return {str(k): _num(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_num(v) for v in x]
    try:
        return _num(float(x))  # numpy scalars
    except (TypeError, ValueError):
        return str(x)


def _flatten(x: Any, prefix: str = "") -> list[tuple[str, Any]]:
    if isinstance(x, dict):
        if not x:
            return [(prefix, "{}")]
        out = []
        for k, v in x.items():
            out += _flatten(v, f"{prefix}.{k}" if prefix else str(k))
        return out
    if isinstance(x, list):
        if not x:
            return [(prefix, "[]")]
        out = []
        for i, v in enumerate(x):
            out += _flatten(v, f"{prefix}[{i}]")
        return out
    return [(prefix, x)]


def _scalar_text(v: Any) -> str:
    if v is None:
        return "null"
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def render(data: Any, fmt: str) -> str:
    data = _num(data)
    if fmt == "json":
        return json.dumps(data, indent=2, ensure_ascii=False) + "\n"
    rows = _flatten(data)
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["key", "value"])
        w.writerows((k, _scalar_text(v)) for k, v in rows)
        return buf.getvalue()
    width = max((len(k) for k, _ in rows), default=0)
    return "".join(f"{k.ljust(width)}  {_scalar_text(v)}\n" for k, v in rows)


# ---------------------------------------------------------------- helpers

def _levels(text: Optional[str]) -> Optional[tuple]:
    """``N`` keeps the default levels below N and ends at N; ``a,b,c`` is taken literally."""
    if text is None:
        return None
    try:
        vals = [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise InvalidInput(f"--trunc expects an integer or a comma list, got {text!r}") from None
    if not vals:
        raise InvalidInput("--trunc is empty")
    if len(vals) == 1:
        n = vals[0]
        return tuple(k for k in SolverConfig.trunc_levels if k < n) + (n,)
    return tuple(vals)


def _config(args) -> SolverConfig:
    kw = {"seed": args.seed, "tol": args.tol}
    lv = _levels(args.trunc)
    if lv is not None:
        kw["trunc_levels"] = lv
    if getattr(args, "method", None):
        kw["method"] = args.method
    if getattr(args, "starts", None):
        kw["starts"] = args.starts
    return SolverConfig(**kw)


def _coerce(v: str):
    try:
        return float(v)
    except ValueError:
        return v


def _operator(args) -> ops.OperatorSpec:
    if bool(args.named) == bool(args.spec):
        raise InvalidInput("give exactly one of --named or --spec")
    if args.spec:
        return ops.load_operator(args.spec)
    params = {}
    for item in args.param or ():
        k, eq, v = item.partition("=")
        if not eq:
            raise InvalidInput(f"--param expects key=value, got {item!r}")
        params[k.strip()] = _coerce(v.strip())
    return ops.make_example(args.named, **params)


# ---------------------------------------------------------------- commands

def cmd_compute(args):
    op = _operator(args)
    rep = min_modulus(op, _config(args), strict=args.strict)
    return {"operator": ops.op_to_dict(op), "m": rep.m, **rep.to_dict()}, EXIT_OK


def cmd_classify(args):
    v = classifier.classify(args.domain, args.range)
    out = v.to_dict()
    if args.explain:
        out["explanation"] = classifier.explain(args.domain, args.range)
        out["moduli_chain"] = list(v.moduli_chain)
    return out, EXIT_OK


def cmd_moduli(args):
    space = sp.parse_space(args.space)
    out = {"space": str(space), "kind": args.kind, "t": args.t}
    try:
        curve = moduli.modulus_curve(space, args.kind)
        out["closed"] = curve(args.t)
        if curve.one_sided:
            out["one_sided"] = curve.bound
    except NotInCatalog:
        if not args.numeric:
            raise
        out["closed"] = None
    if args.numeric:
        x = sp.parse_vector(args.x, space) if args.x else sp.basis(space, 1)
        lv = _levels(args.trunc)
        N = lv[-1] if lv else max(x.max_index(), 1)
        fn = moduli.delta_numeric if args.kind.lower() in ("delta", "convexity") else moduli.rho_numeric
        out["numeric"] = fn(space, x, args.t, N)
    return out, EXIT_OK


def cmd_sequence(args):
    if args.mode == "minimizing":
        op = _operator(args)
        fam = seq.parse_family(args.family, op.domain)
        r = seq.minimizing_check(op, fam, args.horizon, _config(args))
        return r.to_dict(), EXIT_OK
    if not args.space:
        raise InvalidInput(f"--space is required for --mode {args.mode}")
    space = sp.parse_space(args.space)
    fam = seq.parse_family(args.family, space)
    if args.mode == "weak-null":
        return seq.weak_null_classify(fam).to_dict(), EXIT_OK
    if not args.x:
        raise InvalidInput("--x is required for --mode asymptotic")
    x = sp.parse_vector(args.x, space)
    return seq.asymptotic_norm(x, fam, args.horizon).to_dict(), EXIT_OK


def cmd_gallery(args):
    cfg = _config(args)
    if args.max_trunc is not None:
        lv = [n for n in cfg.trunc_levels if n <= args.max_trunc] or [args.max_trunc]
        cfg = cfg.with_levels(lv)
    ids = [args.example] if args.example else None
    summary = gallery.run_all(cfg, ids)
    return summary.to_dict(), EXIT_OK if summary.passed else EXIT_CHECK


def cmd_attainify(args):
    op = _operator(args)
    r = attainify(op, args.eps, _config(args))
    out = r.to_dict()
    out["eps"] = args.eps
    out["within_eps"] = r.perturbation_norm <= args.eps
    return out, EXIT_OK if out["within_eps"] else EXIT_CHECK


def cmd_rules(args):
    return {"rules": classifier.list_rules()}, EXIT_OK


# ---------------------------------------------------------------- parser

def _common(defaults: bool) -> argparse.ArgumentParser:
    d = (lambda v: v) if defaults else (lambda v: argparse.SUPPRESS)
    p = _Parser(add_help=False)
    g = p.add_argument_group("global options")
    g.add_argument("--seed", type=int, default=d(0), help="RNG seed for the multistart solver")
    g.add_argument("--tol", type=float, default=d(1e-9), help="convergence tolerance")
    g.add_argument("--trunc", default=d(None), help="truncation N, or a comma list of levels")
    g.add_argument("--format", choices=("json", "table", "csv"), default=d("json"))
    g.add_argument("--out", default=d(None), help="write output to this path")
    return p


def _op_args(p):
    p.add_argument("--named", help=f"named operator: {', '.join(sorted(ops.NAMED))}")
    p.add_argument("--spec", help="operator JSON file")
    p.add_argument("--param", action="append", metavar="KEY=VALUE",
                   help="parameter for a named operator (repeatable)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="minmod", parents=[_common(True)],
                     description="Minimum modulus of operators between sequence spaces.",
                     epilog=f"space grammar: {sp.GRAMMAR}")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    sub.required = True
    common = _common(False)

    def add(name, fn, help):
        p = sub.add_parser(name, parents=[common], help=help)
        p.set_defaults(fn=fn)
        return p

    p = add("compute", cmd_compute, "minimum modulus trace of an operator")
    _op_args(p)
    p.add_argument("--method", choices=("auto", "multistart"))
    p.add_argument("--starts", type=int)
    p.add_argument("--strict", action="store_true", help="exit 3 if the trace has not stabilized")

    p = add("classify", cmd_classify, "WmP / CPPm verdict for a space pair")
    p.add_argument("--domain", required=True)
    p.add_argument("--range", required=True)
    p.add_argument("--explain", action="store_true")

    p = add("moduli", cmd_moduli, "asymptotic moduli of a space")
    p.add_argument("--space", required=True)
    p.add_argument("--kind", required=True, choices=("delta", "rho"))
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--numeric", action="store_true")
    p.add_argument("--x", help="unit vector literal for --numeric (default e_1)")

    p = add("sequence", cmd_sequence, "minimizing / asymptotic / weak-null checks")
    p.add_argument("--mode", choices=("minimizing", "asymptotic", "weak-null"), default="minimizing")
    p.add_argument("--family", required=True, help="basis[:c[:offset]] | fixed+basis:<vec>:<c> | "
                                                   "partial-sums | explicit:@file.json")
    p.add_argument("--space")
    p.add_argument("--x")
    p.add_argument("--horizon", type=int, default=64)
    _op_args(p)

    p = add("gallery", cmd_gallery, "reproduce the worked examples")
    p.add_argument("--example", help=f"one of {', '.join(gallery.EXAMPLES)}")
    p.add_argument("--max-trunc", type=int)

    p = add("attainify", cmd_attainify, "small perturbation that attains its minimum modulus")
    _op_args(p)
    p.add_argument("--eps", type=float, required=True)

    add("rules", cmd_rules, "list the classifier rule table")
    return parser


def _emit(text: str, out: Optional[str]):
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as e:
        print(f"{e}\n{parser.format_usage()}space grammar: {sp.GRAMMAR}", file=sys.stderr)
        return EXIT_INPUT
    try:
        data, code = args.fn(args)
    except InvalidInput as e:
        msg = str(e) if sp.GRAMMAR in str(e) else f"{e}\nspace grammar: {sp.GRAMMAR}"
        print(f"error: {msg}", file=sys.stderr)
        return EXIT_INPUT
    except NonConvergent as e:
        print(f"error: {e}", file=sys.stderr)
        if e.report is not None:
            _emit(render(e.report.to_dict(), args.format), args.out)
        return EXIT_NONCONV
    except FunctionalNotFound as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_NONCONV
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT
    _emit(render(data, args.format), args.out)
    return code


if __name__ == "__main__":
    sys.exit(main())
