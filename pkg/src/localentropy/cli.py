"""Command-line front end: JSON in, JSON out.

Exit status is 0 on success, 1 when a computation reports a failure flag
(a quasi-tiling that misses its coverage, a violated inequality, a refuted
check) and 2 on input errors.  Output is deterministic; wall-clock timings
appear only with --timings.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from fractions import Fraction

from . import entropy as E
from .group import FiniteSubset, FolnerSequence, boundary, invariance_ratio
from .measures import measure_from_json
from .setcover import DEFAULT_BUDGET
from .subshift import SFT, Cover, Partition, SymbolicSet, symbol_partition
from .tiling import quasi_tile
from . import tuples as T

BUDGET_ENV = "LOCALENTROPY_BUDGET"
SCHEMA_VERSION = 1


class InputError(Exception):
    pass


def clean(obj):
    """Floats to 12 significant digits, fractions to "p/q", tuples to lists."""
    if isinstance(obj, bool) or obj is None or isinstance(obj, (int, str)):
        return obj
    if isinstance(obj, float):
        return E.sig(obj) if math.isfinite(obj) else None
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, dict):
        return {str(k): clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [clean(v) for v in obj]
    if hasattr(obj, "item"):
        return clean(obj.item())
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def read_json(path: str):
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: malformed JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from None


def load_sft(path: str) -> SFT:
    data = read_json(path)
    if isinstance(data, dict) and "factors" in data:
        from .subshift import product_sft

        a, b = (SFT.from_json(f) for f in data["factors"])
        return product_sft(a, b)
    if isinstance(data, dict) and "orbit" in data:
        return SFT.periodic_orbit(str(data["orbit"]))
    return SFT.from_json(data)


def load_cover(path: str, sft: SFT) -> Cover:
    """A list of elements (each a list of patterns), {"partition": [...]}
    for a Borel partition, or {"symbol_partition": true}."""
    data = read_json(path)
    if isinstance(data, dict):
        if data.get("symbol_partition"):
            return symbol_partition(sft.alphabet, sft.d)
        if "partition" in data:
            c = Cover.from_json(data["partition"], sft.d)
            return Partition(c.elements)
        if "elements" in data:
            return Cover.from_json(data["elements"], sft.d)
        raise InputError(f"{path}: unrecognised cover format")
    return Cover.from_json(data, sft.d)


def load_subset(path: str, d: int | None = None) -> FiniteSubset:
    return subset_from(read_json(path), d)


def subset_from(data, d: int | None = None) -> FiniteSubset:
    """A point list, {"box": [lo, hi]} or {"interval": [a, b]} (inclusive)."""
    if isinstance(data, dict) and "box" in data:
        lo, hi = data["box"]
        return FiniteSubset.box(lo, [h + 1 for h in hi])
    if isinstance(data, dict) and "interval" in data:
        a, b = data["interval"]
        return FiniteSubset.interval(a, b + 1)
    if isinstance(data, list):
        return FiniteSubset.of([p if isinstance(p, list) else [p] for p in data], d)
    raise InputError("unrecognised set format")


def folner_from_args(args, d: int) -> FolnerSequence:
    if args.folner == "box":
        return FolnerSequence("box", d)
    if args.folner == "shifted":
        return FolnerSequence("shifted_interval", 1, (0, 0, 1))
    return FolnerSequence.from_json(read_json(args.folner))


def budget_from(args) -> int:
    if args.budget is not None:
        return args.budget
    env = os.environ.get(BUDGET_ENV)
    if env:
        try:
            return int(env)
        except ValueError:
            raise InputError(f"{BUDGET_ENV} must be an integer") from None
    return DEFAULT_BUDGET


# ---------------------------------------------------------------------------
# commands; each returns (ok, result)


def cmd_group(args):
    if args.action == "folner":
        seq = FolnerSequence("shifted_interval", 1, tuple(args.coeffs)) if args.coeffs else FolnerSequence("box", args.d)
        sets = [seq(n) for n in range(1, args.n + 1)]
        return True, {"sequence": seq.to_json(), "sets": [s.to_json() for s in sets], "sizes": [len(s) for s in sets]}
    if args.set is None or args.k is None:
        raise InputError("group boundary needs --set and --k")
    A = load_subset(args.set)
    K = load_subset(args.k, A.d)
    rep = invariance_ratio(A, K, args.delta)
    out = {"boundary": boundary(A, K).to_json(), **rep.to_dict()}
    return rep.satisfied is not False, out


def cmd_tile(args):
    shapes = [subset_from(s) for s in read_json(args.shapes)]
    target = load_subset(args.target)
    q = quasi_tile(shapes, target, args.epsilon)
    return q.ok, q.to_json()


def cmd_lang(args):
    sft = load_sft(args.sft)
    window = load_subset(args.window, sft.d) if args.window else FiniteSubset.interval(0, args.n)
    lang = sft.language(window, args.margin)
    out = {"window": window.to_json(), "count": len(lang), "exact": lang.exact}
    if args.words:
        out["words"] = lang.words()
    return True, out


def _estimate(e: E.EntropyEstimate, timings: bool) -> dict:
    return e.to_json(timings)


def cmd_entropy(args):
    sft = load_sft(args.sft)
    U = load_cover(args.cover, sft)
    seq = folner_from_args(args, sft.d)
    budget = budget_from(args)
    if args.action == "top":
        est = E.h_top(sft, U, seq, args.nmax, budget=budget)
        return True, {"estimate": _estimate(est, args.timings), "budget": budget}
    if args.action == "vp":
        if not args.measures:
            raise InputError("entropy vp needs --measures")
        data = read_json(args.measures)
        mus = [measure_from_json(m) for m in data]
        rep = E.vp_check(sft, U, mus, seq, args.nmax, args.refine)
        out = {
            "h_top": _estimate(rep["h_top"], args.timings),
            "measures": [_estimate(e, args.timings) for e in rep["measures"]],
            "argmax": rep["argmax"],
            "max": rep["max"],
            "gap": rep["gap"],
            "one_sided_ok": rep["one_sided_ok"],
        }
        return rep["one_sided_ok"], out
    if not args.measure:
        raise InputError(f"entropy {args.action} needs --measure")
    mu = measure_from_json(read_json(args.measure))
    if args.action == "katok":
        est = E.katok_entropy(mu, U, seq, args.nmax, args.epsilon, sft, budget)
        checks = est.weiss
        return all(c["holds"] for c in checks), {"estimate": _estimate(est, args.timings), "weiss": checks, "budget": budget}
    if U.is_partition:
        est = E.h_mu_partition(mu, U, seq, args.nmax, sft)
        return True, {"estimate": _estimate(est, args.timings)}
    minus = E.h_mu_minus_cover(mu, U, seq, args.nmax, sft)
    plus = E.h_mu_cover(mu, U, seq, args.nmax, sft, args.refine)
    gaps = [p - m for p, m in zip(plus.values, minus.values)]
    out = {"estimate": _estimate(plus, args.timings), "minus": _estimate(minus, args.timings), "gap": gaps, "refine": args.refine}
    return all(g >= -1e-9 for g in gaps), out


def _points(path: str):
    data = read_json(path)
    return T.TupleCandidate.from_json(data) if isinstance(data, dict) else T.TupleCandidate.of_words([str(w) for w in data])


def cmd_tuples(args):
    if args.action == "lambda":
        if not (args.measure and args.sets):
            raise InputError("tuples lambda needs --measure and --sets")
        mu = measure_from_json(read_json(args.measure))
        sets = [SymbolicSet.from_json(s) for s in read_json(args.sets)]
        lam = T.lambda_n(mu, args.n)
        mass = lam.mass(sets)
        return True, {"variant": lam.variant, "n": lam.n, "mass": mass, "mass_float": float(mass)}
    if args.action == "product":
        if not (args.sft and args.sft2):
            raise InputError("tuples product needs --sft and --sft2")
        a, b = load_sft(args.sft), load_sft(args.sft2)
        from .subshift import product_sft

        prod = product_sft(a, b)
        cands = T.product_candidates(prod, 0, args.length, args.sample, args.seed)
        rep = T.product_tuple_check(a, b, cands, args.rmax, args.nmax, args.tol, sft=prod)
        return rep.disagreements == 0, rep.to_json()
    if not args.sft:
        raise InputError(f"tuples {args.action} needs --sft")
    sft = load_sft(args.sft)
    if args.action == "upe":
        rep = T.upe_check(sft, args.r, args.nmax, args.tol)
        return True, rep.to_json()
    if not args.points:
        raise InputError("tuples check needs --points")
    c = _points(args.points)
    v = T.is_entropy_tuple(sft, c, max(args.rmax, c.r), args.nmax, args.tol)
    return True, v.to_json()


def plot_rows(report: dict) -> list[str]:
    """Header plus one "n value certified_upper" line per window; the last
    column is the running certified bound (monotone nonincreasing)."""
    result = report.get("result", report)
    est = result.get("estimate") or result.get("h_top") or result
    if "values" not in est:
        raise InputError("report contains no entropy estimate")
    bound = min((v for v in est.get("bounds", {}).values() if v is not None), default=math.inf)
    lines = [f"# command={report.get('command', '?')} exact={str(est.get('exact', False)).lower()} columns: n value certified_upper"]
    running = math.inf
    for row in est["values"]:
        running = min(running, row["value"])
        lines.append(f"{row['n']} {E.sig(row['value'])!r} {E.sig(min(running, bound))!r}")
    return lines


def cmd_plotdata(args):
    report = read_json(args.report)
    return True, plot_rows(report)


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="localentropy", description="Local entropy of covers for Z^d subshifts of finite type.")
    p.add_argument("--output", "-o", help="write the report here instead of standard output")
    p.add_argument("--timings", action="store_true", help="include wall-clock seconds per window")
    p.add_argument("--budget", type=int, help=f"search node budget (default from ${BUDGET_ENV} or {DEFAULT_BUDGET})")
    p.add_argument("--seed", type=int, default=0, help="seed for sampled candidates")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("group", help="Følner sets and boundaries")
    g.add_argument("action", choices=["folner", "boundary"])
    g.add_argument("--d", type=int, default=1)
    g.add_argument("--n", type=int, default=5)
    g.add_argument("--coeffs", type=int, nargs="*", help="shifted intervals a_n = sum c_j n^j")
    g.add_argument("--set", help="JSON finite subset A")
    g.add_argument("--k", help="JSON finite subset K")
    g.add_argument("--delta", type=float)

    t = sub.add_parser("tile", help="ε-quasi-tile a target by shapes")
    t.add_argument("--shapes", required=True)
    t.add_argument("--target", required=True)
    t.add_argument("--epsilon", type=float, default=0.1)

    la = sub.add_parser("lang", help="window language of an SFT")
    la.add_argument("--sft", required=True)
    la.add_argument("--window")
    la.add_argument("--n", type=int, default=4, help="interval {0..n-1} when no window file is given")
    la.add_argument("--margin", type=int, default=2)
    la.add_argument("--words", action="store_true")

    e = sub.add_parser("entropy", help="topological, measure, Katok and variational estimates")
    e.add_argument("action", choices=["top", "measure", "katok", "vp"])
    e.add_argument("--sft", required=True)
    e.add_argument("--cover", required=True)
    e.add_argument("--measure")
    e.add_argument("--measures", help="JSON list of measures (vp)")
    e.add_argument("--folner", default="box", help="box, shifted, or a JSON Følner sequence file")
    e.add_argument("--nmax", type=int, default=8)
    e.add_argument("--epsilon", type=float, default=0.1)
    e.add_argument("--refine", type=int, default=1)

    tu = sub.add_parser("tuples", help="entropy tuples, u.p.e. evidence, λ_n and products")
    tu.add_argument("action", choices=["check", "upe", "lambda", "product"])
    tu.add_argument("--sft")
    tu.add_argument("--sft2")
    tu.add_argument("--points")
    tu.add_argument("--measure")
    tu.add_argument("--sets")
    tu.add_argument("--n", type=int, default=2)
    tu.add_argument("--r", type=int, default=1)
    tu.add_argument("--rmax", type=int, default=T.DEFAULT_RMAX)
    tu.add_argument("--nmax", type=int, default=T.DEFAULT_NMAX)
    tu.add_argument("--tol", type=float, default=T.DEFAULT_TOL)
    tu.add_argument("--length", type=int, default=1, help="word length of sampled product candidates")
    tu.add_argument("--sample", type=int)

    pd = sub.add_parser("plotdata", help="tabulate an entropy report for plotting")
    pd.add_argument("--report", required=True)
    return p


COMMANDS = {
    "group": cmd_group,
    "tile": cmd_tile,
    "lang": cmd_lang,
    "entropy": cmd_entropy,
    "tuples": cmd_tuples,
    "plotdata": cmd_plotdata,
}


def _check_ranges(args):
    for name in ("nmax", "n", "length"):
        v = getattr(args, name, None)
        if v is not None and v < 1:
            raise InputError(f"--{name} must be >= 1")
    for name in ("rmax", "r", "refine"):
        v = getattr(args, name, None)
        if v is not None and v < 0:
            raise InputError(f"--{name} must be >= 0")
    eps = getattr(args, "epsilon", None)
    if eps is not None and not 0 < eps < 1:
        raise InputError("--epsilon must lie in (0, 1)")


def _emit(text: str, path: str | None):
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0) and 2
    try:
        _check_ranges(args)
        ok, result = COMMANDS[args.command](args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, KeyError, TypeError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    if args.command == "plotdata":
        _emit("\n".join(result) + "\n", args.output)
        return 0
    report = {
        "schema_version": SCHEMA_VERSION,
        "command": " ".join([args.command] + ([args.action] if hasattr(args, "action") else [])),
        "ok": bool(ok),
        "result": clean(result),
    }
    _emit(json.dumps(report, indent=2, sort_keys=True) + "\n", args.output)
    return 0 if ok else 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
