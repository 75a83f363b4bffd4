"""Batch command-line front end.

Every command is deterministic for fixed inputs and flags.  Exit codes:
0 success, 1 a check failed (a JSON defect report is printed), 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path

from .assoc import (
    Associator,
    AssociatorError,
    formal_associator,
    formal_kz,
    reference_associator,
    solve_associator,
    torsor_divide,
    twisted_inverse,
    zeta_inv_table,
)
from .coeffring import Coefficient, Symbol, format_scalar, scalar_to_json
from .diagrams import Skeleton, orient_str, parse_orients, quotient
from .kont import Evaluator, congruence_report, gamma0, solve_twistor
from .tangles import CATALOGUE_KNOTS, ParseError, TypeMismatch, builtin, components_of, parse, parse_coeff

__all__ = ["main", "run", "UsageError"]


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# inputs


def _read_word(text: str):
    """A catalogue name, a path to a .tng file, or an inline word."""
    if text in CATALOGUE_KNOTS:
        return builtin(text)
    path = Path(text)
    if text.endswith(".tng") or (len(text) < 256 and path.is_file()):
        try:
            text = path.read_text()
        except OSError as exc:
            raise UsageError(f"cannot read {text}: {exc}") from exc
    return parse(text)


def _load_assoc(source: str, degree: int, mode: str) -> Associator:
    if source == "rational":
        return reference_associator(degree)
    if source == "formal":
        return formal_associator(degree)
    if source == "free":
        return solve_associator(Fraction(1), degree, "introduce-free-symbols")
    path = Path(source)
    if not path.is_file():
        raise UsageError(f"--assoc must be rational, formal, free or a JSON file, got {source!r}")
    try:
        p = Associator.from_json(json.loads(path.read_text()))
    except (ValueError, KeyError) as exc:
        raise UsageError(f"bad associator file {source}: {exc}") from exc
    if p.maxdeg < degree:
        raise UsageError(f"associator in {source} has degree {p.maxdeg} < {degree}")
    return p.truncate(degree)


def _assoc_arg(args) -> str:
    return args.assoc or ("formal" if args.mode == "formal" else "rational")


def _skeleton(text: str) -> Skeleton:
    if text == "circle":
        return Skeleton.circle()
    try:
        return Skeleton.string_link(parse_orients(text))
    except ValueError as exc:
        raise UsageError(f"--skeleton must be 'circle' or an orientation string, got {text!r}") from exc


def _mu(text: str):
    if text == "mu":
        return Coefficient.symbol(Symbol("mu"))
    try:
        return parse_coeff(text)
    except ParseError as exc:
        raise UsageError(f"bad --mu {text!r}: {exc}") from exc


# ---------------------------------------------------------------------------
# output


class _Out:
    def __init__(self, as_json: bool):
        self.as_json = as_json
        self.lines: list = []
        self.record: dict = {}

    def line(self, s: str = "") -> None:
        self.lines.append(s)

    def flush(self) -> None:
        if self.as_json:
            sys.stdout.write(json.dumps(self.record, sort_keys=True, indent=1) + "\n")
        else:
            sys.stdout.write("\n".join(self.lines) + ("\n" if self.lines else ""))


def _defects(out: _Out, defects: list) -> int:
    if not defects:
        return 0
    report = json.dumps({"defects": defects}, sort_keys=True)
    if not out.as_json:
        out.line("defect report: " + report)
    out.record["defects"] = defects
    return 1


def _vector_text(v) -> str:
    return str(v)


# ---------------------------------------------------------------------------
# commands


def cmd_solve_assoc(args, out: _Out) -> int:
    p = solve_associator(_mu(args.mu), args.degree, args.policy)
    out.record = p.to_json()
    out.record["free_dims"] = {str(k): v for k, v in p.info["free_dims"].items()}
    out.line(f"mu = {format_scalar(p.mu)}")
    out.line("free dimensions: " + " ".join(f"{k}:{v}" for k, v in sorted(p.info["free_dims"].items())))
    out.line(f"phi = {p.phi}")
    return 0


def cmd_check_assoc(args, out: _Out) -> int:
    p = _load_assoc(args.file, args.degree, args.mode)
    res = p.residuals()
    defects = []
    for name in sorted(res):
        r = res[name]
        bad = bool(r)
        out.line(f"{name}: {'FAIL' if bad else 'OK'}")
        out.record[name] = not bad
        if bad:
            defects.append({"relation": name})
    return _defects(out, defects)


def cmd_invert(args, out: _Out) -> int:
    p = _load_assoc(args.file, args.degree, args.mode)
    h = twisted_inverse(p.phi)
    out.record = {"kind": "twisted-inverse", "maxdeg": h.maxdeg, "series": h.to_json()}
    out.line(f"H = {h}")
    return 0


def cmd_zeta_inv(args, out: _Out) -> int:
    n = args.weight
    if args.mode == "formal":
        phi = formal_kz(n)
    else:
        phi = _load_assoc(_assoc_arg(args), n, args.mode).phi
    table = zeta_inv_table(phi, n)
    rows = []
    for k in sorted(table, key=lambda k: (sum(k), len(k), k)):
        rows.append({"index": list(k), "value": scalar_to_json(table[k])})
        out.line(f"zeta_inv({','.join(map(str, k))}) = {format_scalar(table[k])}")
    out.record = {"kind": "zeta-inv", "weight": n, "rows": rows}
    return 0


def cmd_parse(args, out: _Out) -> int:
    w = _read_word(args.word)
    comps = components_of(w)
    out.line(f"word: {w}")
    out.line(f"source: {orient_str(w.source) or '-'}")
    out.line(f"target: {orient_str(w.target) or '-'}")
    out.line(f"skeleton: {w.skeleton()}")
    out.line(f"components: {comps['open']} open, {comps['closed']} closed")
    out.line(f"knot: {'yes' if w.is_knot() else 'no'}")
    out.record = {"word": str(w), "skeleton": w.skeleton().to_json(), "components": comps, "knot": w.is_knot()}
    return 0


def cmd_eval(args, out: _Out) -> int:
    p = _load_assoc(_assoc_arg(args), args.degree, args.mode)
    e = Evaluator(p, args.degree)
    words = [_read_word(x) for x in args.words]
    values = e.evaluate_many(words, threads=args.threads)
    recs = []
    for text, v in zip(args.words, values):
        out.line(f"{text}: {_vector_text(v)}")
        recs.append({"word": text, "value": v.to_json()})
    out.record = {"kind": "evaluation", "results": recs}
    return 0


def cmd_invariant(args, out: _Out) -> int:
    p = _load_assoc(_assoc_arg(args), args.degree, args.mode)
    if p.mu != 1:
        raise UsageError("the knot invariant needs a mu = 1 associator")
    e = Evaluator(p, args.degree)
    words = [_read_word(x) for x in args.words]
    for text, w in zip(args.words, words):
        if not w.is_knot():
            raise UsageError(f"{text} is not a knot")
    values = e.evaluate_many(words, threads=args.threads)
    recs = []
    for text, v in zip(args.words, values):
        out.line(f"I({text}) = {_vector_text(v)}")
        recs.append({"knot": text, "value": v.to_json()})
    out.record = {"kind": "invariant", "results": recs}
    return 0


def cmd_gamma0(args, out: _Out) -> int:
    p = _load_assoc(_assoc_arg(args), args.degree, args.mode)
    e = Evaluator(p, args.degree)
    c0, gimg, cert = gamma0(p, args.degree, e)
    out.line(f"{cert['statement']}: {'OK' if cert['ok'] else 'FAIL'}")
    defects = []
    if not cert["ok"]:
        defects.append({"check": "gamma0", "failed_degrees": cert["failed_degrees"]})
    through = min(args.through, args.degree)
    report = congruence_report(e, through)
    out.line(f"congruence gamma0 == unknot - (1/24)(unknot - trefoil) through degree {through}:")
    rec = {}
    for name, r in report.items():
        per = " ".join(f"{m}:{'OK' if ok else 'FAIL'}" for m, ok in sorted(r["per_degree"].items()))
        out.line(f"  {name}: {'OK' if r['ok'] else 'FAIL'} ({per})")
        rec[name] = {"ok": r["ok"], "per_degree": {str(m): ok for m, ok in r["per_degree"].items()}}
    if not any(r["ok"] for r in report.values()):
        bad = sorted({m for r in report.values() for m, ok in r["per_degree"].items() if not ok})
        defects.append({"check": "congruence", "constant": "1/24", "failed_degrees": bad})
    out.record = {
        "kind": "gamma0",
        "certificate": {k: v for k, v in cert.items() if k != "coefficients"},
        "coefficients": {k: scalar_to_json(v) for k, v in cert["coefficients"].items()},
        "c0": c0.to_json(),
        "congruence": rec,
    }
    return _defects(out, defects)


def cmd_twistor(args, out: _Out) -> int:
    n = args.degree
    p0 = _load_assoc(_assoc_arg(args), n, args.mode)
    if args.other:
        p1 = _load_assoc(args.other, n, args.mode)
    else:
        p1 = solve_associator(p0.mu, n, "pick-given", given={(3, 0): 1}) if n >= 3 else p0
    sigma = torsor_divide(p0, p1, "left")
    tw = solve_twistor(sigma, n)
    framed_ok = not tw.residual(framed=True)
    fi_ok = not tw.residual(framed=False)
    side = tw.side_conditions()
    out.line("solution dimensions: " + " ".join(f"{k}:{v}" for k, v in sorted(tw.dims.items())))
    out.line(f"residual (framed): {'0' if framed_ok else 'nonzero'}")
    out.line(f"residual (FI): {'0' if fi_ok else 'nonzero'}")
    out.line(f"side conditions: {'OK' if side else 'FAIL'}")
    out.record = tw.to_json()
    out.record.update({"residual_framed_zero": framed_ok, "residual_fi_zero": fi_ok, "side_conditions": side})
    defects = [{"check": name} for name, ok in (("residual", framed_ok and fi_ok), ("side", side)) if not ok]
    return _defects(out, defects)


def cmd_dims(args, out: _Out) -> int:
    skel = _skeleton(args.skeleton)
    dims = [len(quotient(skel, m, fi=not args.framed).basis) for m in range(args.degree + 1)]
    out.line(" ".join(map(str, dims)))
    out.record = {
        "kind": "dims",
        "skeleton": args.skeleton,
        "framed": args.framed,
        "dims": dims,
        "fingerprints": [quotient(skel, m, fi=not args.framed).fingerprint() for m in range(args.degree + 1)],
    }
    return 0


def cmd_decompose(args, out: _Out) -> int:
    p = _load_assoc(_assoc_arg(args), args.degree, args.mode)
    w = _read_word(args.word)
    if not w.is_knot():
        raise UsageError(f"{args.word} is not a knot")
    v = Evaluator(p, args.degree).evaluate(w)
    parts = []
    for m in range(args.degree + 1):
        part = v.degree_part(m)
        out.line(f"degree {m}: {_vector_text(part)}")
        parts.append(part.to_json())
    out.record = {"kind": "decomposition", "parts": parts}
    return 0


# ---------------------------------------------------------------------------
# argument parsing


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="machine-readable output")
    common.add_argument("--degree", type=int, default=4, help="truncation degree (default 4)")
    common.add_argument("--threads", type=int, default=1, help="worker threads")
    common.add_argument("--assoc", default=None, help="rational, formal, free or an associator JSON file")
    common.add_argument("--mode", choices=("rational", "formal"), default="rational")

    ap = argparse.ArgumentParser(prog="gt-tangle", description="GT actions on tangles and the Kontsevich invariant")
    sub = ap.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve-assoc", parents=[common], help="solve pentagon and hexagons degree by degree")
    s.add_argument("--mu", default="1", help="a rational or the symbol 'mu'")
    s.add_argument("--policy", default="pick-zero", choices=("pick-zero", "introduce-free-symbols"))
    s.set_defaults(fn=cmd_solve_assoc)

    s = sub.add_parser("check-assoc", parents=[common], help="check pentagon and hexagon residuals")
    s.add_argument("file", help="associator JSON file, or rational/formal/free")
    s.set_defaults(fn=cmd_check_assoc)

    s = sub.add_parser("invert", parents=[common], help="twisted inverse of an associator series")
    s.add_argument("file", help="associator JSON file, or rational/formal/free")
    s.set_defaults(fn=cmd_invert)

    s = sub.add_parser("zeta-inv", parents=[common], help="table of inverse multiple zeta values")
    s.add_argument("--weight", type=int, default=4)
    s.set_defaults(fn=cmd_zeta_inv)

    s = sub.add_parser("parse", parents=[common], help="parse and type check a word")
    s.add_argument("word")
    s.set_defaults(fn=cmd_parse)

    s = sub.add_parser("eval", parents=[common], help="evaluate words to chord diagrams")
    s.add_argument("words", nargs="+")
    s.set_defaults(fn=cmd_eval)

    s = sub.add_parser("invariant", parents=[common], help="Kontsevich invariant of knots")
    s.add_argument("words", nargs="+")
    s.set_defaults(fn=cmd_invariant)

    s = sub.add_parser("gamma0", parents=[common], help="certificate for the inverse image of e")
    s.add_argument("--through", type=int, default=3, help="degree bound of the congruence report")
    s.set_defaults(fn=cmd_gamma0)

    s = sub.add_parser("twistor", parents=[common], help="solve the twistor of a GRT element")
    s.add_argument("--other", default=None, help="second associator; default is a solver output")
    s.set_defaults(fn=cmd_twistor)

    s = sub.add_parser("dims", parents=[common], help="dimensions of the chord diagram quotients")
    s.add_argument("--skeleton", default="circle", help="'circle' or an orientation string such as ^^v")
    s.add_argument("--framed", action="store_true", help="impose 4T only")
    s.set_defaults(fn=cmd_dims)

    s = sub.add_parser("decompose", parents=[common], help="homogeneous parts of a knot invariant")
    s.add_argument("word")
    s.set_defaults(fn=cmd_decompose)
    return ap


def run(argv: list | None = None) -> int:
    ap = _parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 2
    if args.degree < 0 or args.threads < 1:
        sys.stderr.write("gt-tangle: --degree must be >= 0 and --threads >= 1\n")
        return 2
    out = _Out(args.json)
    try:
        code = args.fn(args, out)
    except (UsageError, ParseError, TypeMismatch, AssociatorError, ValueError) as exc:
        sys.stderr.write(f"gt-tangle: {exc}\n")
        return 2
    out.flush()
    return code


def main() -> None:
    sys.exit(run())
