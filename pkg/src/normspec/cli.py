"""Command-line entry point: ``normspec <subcommand> ...``.

Every subcommand reads JSON files and writes one JSON report.  Exit status is
0 when the checked property holds, 1 when it fails and 2 on bad input.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from typing import Any, Callable

import numpy as np

from . import jsonio as J
from ._util import canon
from .calculus import functional_calculus, separated_projection
from .equivalence import aue_align, axiom_residuals, limit_theory, perturbation_distance, spectrally_equivalent
from .errors import BudgetError, DivergenceError, NormSpecError, NoAlignmentError, NotNormalError
from .independence import indep
from .linalg import decompose_normal
from .model import Region, allocate_fresh, model_from_matrix
from .typespace import NetIndex, epsilon_net, realize_measure, type_distance, type_of


class InputError(Exception):
    pass


def _load(path: str) -> Any:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc


def _parse(path: str, reader: Callable[[Any], Any]) -> Any:
    obj = _load(path)
    try:
        return reader(obj)
    except (KeyError, TypeError, ValueError, IndexError) as exc:
        raise InputError(f"{path}: {exc}") from exc


def _warn_norm(M, source: str) -> None:
    # the theory is about contractions; larger spectra are accepted with a warning
    n = M.norm() if M.blocks else 0.0
    if n > 1 + 1e-9:
        print(f"warning: {source}: spectral radius {n:.6g} exceeds 1", file=sys.stderr)


def _model(path: str):
    M = _parse(path, J.model_from_json)
    _warn_norm(M, path)
    return M


def _c(z: complex) -> list[float]:
    return [complex(z).real, complex(z).imag]


def _roundoff(x: float) -> float:
    # residuals at rounding level keep two significant digits so reports stay byte-stable across BLAS builds
    return float(f"{x:.2g}")


def _num(x: float):
    return "inf" if math.isinf(x) else float(x)


def cmd_decompose(args) -> tuple[dict, int]:
    t = _parse(args.matrix, J.matrix_from_json)
    try:
        model, u, handles = model_from_matrix(t, tol=args.tol if args.tol is not None else 1e-8, label=args.label)
    except NotNormalError as exc:
        return {"normal": False, "normality_residual": exc.residual}, 1
    _warn_norm(model, args.matrix)
    dec = decompose_normal(t, tol=args.tol if args.tol is not None else 1e-8)
    mj = J.model_to_json(model)
    if "normality_residual" in mj:
        mj["normality_residual"] = _roundoff(model.normality_residual)
    err = dec.reconstruction_error(t)
    if args.verbose:
        print(f"reconstruction error {err:.3e}, normality residual {model.normality_residual:.3e}", file=sys.stderr)
    report = {
        "normal": True,
        "model": mj,
        "eigenvalues": [_c(canon(z)) for z in dec.eigenvalues],
        "normality_residual": _roundoff(model.normality_residual),
        "reconstruction_error": _roundoff(err),
        "handles": [list(h) for h in handles],
    }
    return report, 0


def cmd_axioms(args) -> tuple[dict, int]:
    M = _model(args.model)
    th = _parse(args.theory, J.theory_from_json)
    res = args.tol if args.tol is not None else 1e-9
    r = axiom_residuals(M, th, res)
    report = {
        "holds": r.holds,
        "resolution": res,
        "max_residual": r.max_residual,
        "normality": r.normality,
        "eigen": [{"point": _c(z), "residual": v} for z, v in r.eigen],
        "probe_violations": [{"point": _c(z), "violation": v} for z, v in r.probes if v > 0],
        "probes_checked": len(r.probes),
        "multiplicity": [
            {"point": _c(z), "expected": J._mult_out(e), "found": J._mult_out(f), "residual": v} for z, e, f, v in r.multiplicity
        ],
    }
    return report, 0 if r.holds else 1


def cmd_equiv(args) -> tuple[dict, int]:
    A = _model(args.a)
    B = _model(args.b)
    tol = args.tol if args.tol is not None else 0.0
    r = spectrally_equivalent(A, B, tol)
    report = {"equivalent": r.equivalent, "distance": _num(r.distance), "tol": tol, "pairs": [list(p) for p in r.pairs], "reason": r.reason}
    return report, 0 if r.equivalent else 1


def cmd_align(args) -> tuple[dict, int]:
    A = _model(args.a)
    B = _model(args.b)
    try:
        c = aue_align(A, B)
    except NoAlignmentError as exc:
        return {"aligned": False, "reason": str(exc), "bound": None if exc.bound is None else _num(exc.bound)}, 1
    report = {
        "aligned": True,
        "residual": c.residual,
        "unit_pairs": [[list(x), list(y)] for x, y in c.unit_pairs],
        "absorbed_a": [[list(x), j] for x, j in c.absorbed_a],
        "absorbed_b": [[i, list(y)] for i, y in c.absorbed_b],
        "inf_pairs_a": [list(p) for p in c.inf_pairs_a],
        "inf_pairs_b": [list(p) for p in c.inf_pairs_b],
    }
    ok = args.tol is None or c.residual <= args.tol
    return report, 0 if ok else 1


def _read_limit(obj):
    models = [J.model_from_json(m) for m in obj["models"]]
    radii = [float(r) for r in obj["radii"]]
    return models, radii, obj.get("tol")


def cmd_limit(args) -> tuple[dict, int]:
    models, radii, tol = _parse(args.sequence, _read_limit)
    for i, M in enumerate(models):
        _warn_norm(M, f"{args.sequence}: model {i}")
    tol = args.tol if args.tol is not None else tol
    try:
        th = limit_theory(models, radii, tol)
    except DivergenceError as exc:
        w = exc.witness
        return {"converged": False, "reason": str(exc), "witness": w if isinstance(w, dict) else {"values": [_num(x) for x in w]}}, 1
    return {"converged": True, "theory": J.theory_to_json(th)}, 0


def cmd_type_dist(args) -> tuple[dict, int]:
    p = _parse(args.p, J.type_from_json)
    q = _parse(args.q, J.type_from_json)
    d = type_distance(p, q)
    ok = args.tol is None or d <= args.tol
    return {"distance": d, "param_label": p.param_label}, 0 if ok else 1


def _read_sets(obj, model):
    return [[J.vector_from_json(v, model) for v in obj.get(k, [])] for k in ("A", "B", "C")]


def cmd_indep(args) -> tuple[dict, int]:
    M = _model(args.model)
    A, B, C = _parse(args.sets, lambda o: _read_sets(o, M))
    tol = args.tol if args.tol is not None else 1e-8
    r = indep(A, B, C, tol, model=M)
    return {"independent": r.independent, "witnesses": list(r.witnesses), "tol": r.tol}, 0 if r.independent else 1


def _parse_complex_list(text: str) -> list[complex]:
    out = []
    for part in text.split(";"):
        part = part.strip()
        if part:
            out.append(complex(part.replace(" ", "").replace("i", "j")))
    return out


def cmd_calc(args) -> tuple[dict, int]:
    M = _model(args.model)
    name = args.f
    if name == "bump":
        if not args.k1:
            raise InputError("bump needs --k1 with the eigenvalues of K1")
        k1 = {complex(z) for z in _parse_complex_list(args.k1)}
        K1 = Region.points(k1)
        K2 = Region.points(z for z in M.spectrum() if z not in K1)
        gaps = [abs(x - y) for x in M.spectrum() if x in K1 for y in M.spectrum() if y not in K1]
        eps = args.eps if args.eps is not None else (min(gaps) / 2 if gaps else 1.0)
        sp = separated_projection(M, K1, K2, eps)
        report = {
            "projection": [{"point": _c(b.lam), "value": v} for b, v in zip(M.blocks, sp.values)],
            "witness_degree": sp.witness.degree,
            "witness_error": _roundoff(sp.witness_error),
            "eps": eps,
        }
        return report, 0 if sp.witness_error <= 1e-6 else 1
    if name == "square":
        f = lambda z: z * z
    elif name == "modsq":
        f = lambda z: abs(z) ** 2
    elif name == "mobius":
        try:
            a, b, c, d = _parse_complex_list(args.coeffs or "")
        except ValueError as exc:
            raise InputError("mobius needs --coeffs 'a;b;c;d'") from exc
        for lam in M.spectrum():
            if c * lam + d == 0:
                raise InputError(f"mobius map has a pole at the eigenvalue {lam}")
        f = lambda z: (a * z + b) / (c * z + d)
    else:
        raise InputError(f"unknown function {name!r}")
    return {"model": J.model_to_json(functional_calculus(M, f))}, 0


def cmd_pert(args) -> tuple[dict, int]:
    M = _model(args.model)
    mu = _parse(args.p, J.measure_from_json)
    nu = _parse(args.q, J.measure_from_json)
    p = type_of([realize_measure(M, mu)], model=M)
    q = type_of([realize_measure(M, nu)], model=M)
    r = perturbation_distance(p, q, M)
    report = {
        "bound": r.bound,
        "shift": r.threshold,
        "ell2": r.ell2,
        "type_distance": type_distance(p, q),
        "pairs": [[_c(x), _c(y)] for x, y in r.pairs],
        "unmatched_p": [_c(x) for x in r.unmatched_p],
        "unmatched_q": [_c(y) for y in r.unmatched_q],
    }
    ok = args.tol is None or r.bound <= args.tol
    return report, 0 if ok else 1


def cmd_net(args) -> tuple[dict, int]:
    M = _model(args.model)
    try:
        net = epsilon_net(M, [], args.eps, args.cap)
    except BudgetError as exc:
        return {"size": None, "reason": str(exc), "achievable": exc.achievable}, 1
    report: dict[str, Any] = {"size": len(net), "eps": args.eps, "cap": args.cap}
    if args.samples:
        rng = np.random.default_rng(args.seed)
        for bi, b in enumerate(M.blocks):
            if b.allocated == 0:
                allocate_fresh(M, bi)
        handles = M.coordinates()
        index = NetIndex(net)
        worst = 0.0
        for _ in range(args.samples):
            x = rng.standard_normal(len(handles)) + 1j * rng.standard_normal(len(handles))
            x *= args.cap * rng.random() / np.linalg.norm(x)
            v = M.vector(dict(zip(handles, x)))
            worst = max(worst, index.nearest(type_of([v], model=M))[1])
        report["samples"] = args.samples
        report["seed"] = args.seed
        report["max_sample_distance"] = worst
        return report, 0 if worst < args.eps else 1
    return report, 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol", type=float, default=None, help="tolerance for the checked property")
    common.add_argument("--verbose", action="store_true", help="print a summary to stderr")
    common.add_argument("--seed", type=int, default=0, help="seed for randomized checks")
    common.add_argument("--out", default=None, help="write the report to this path")

    ap = argparse.ArgumentParser(prog="normspec", description="Spectral models of normal operators.")
    sub = ap.add_subparsers(dest="cmd", required=True)

    s = sub.add_parser("decompose", parents=[common], help="matrix JSON -> spectral model")
    s.add_argument("matrix")
    s.add_argument("--label", default="matrix")
    s.set_defaults(func=cmd_decompose)

    s = sub.add_parser("axioms", parents=[common], help="axiom residuals of a model against a theory")
    s.add_argument("model")
    s.add_argument("theory")
    s.set_defaults(func=cmd_axioms)

    s = sub.add_parser("equiv", parents=[common], help="spectral equivalence of two models")
    s.add_argument("a")
    s.add_argument("b")
    s.set_defaults(func=cmd_equiv)

    s = sub.add_parser("align", parents=[common], help="bottleneck alignment of two models")
    s.add_argument("a")
    s.add_argument("b")
    s.set_defaults(func=cmd_align)

    s = sub.add_parser("limit", parents=[common], help="limit theory of a sequence of models")
    s.add_argument("sequence")
    s.set_defaults(func=cmd_limit)

    s = sub.add_parser("type-dist", parents=[common], help="distance between two 1-types")
    s.add_argument("p")
    s.add_argument("q")
    s.set_defaults(func=cmd_type_dist)

    s = sub.add_parser("indep", parents=[common], help="independence of A from C over B")
    s.add_argument("model")
    s.add_argument("sets")
    s.set_defaults(func=cmd_indep)

    s = sub.add_parser("calc", parents=[common], help="functional calculus on a model")
    s.add_argument("model")
    s.add_argument("--f", required=True, choices=["square", "modsq", "mobius", "bump"])
    s.add_argument("--coeffs", default=None, help="mobius coefficients 'a;b;c;d'")
    s.add_argument("--k1", default=None, help="eigenvalues of K1 for bump, ';'-separated")
    s.add_argument("--eps", type=float, default=None, help="separation for bump")
    s.set_defaults(func=cmd_calc)

    s = sub.add_parser("pert", parents=[common], help="perturbation distance bound of two 1-types")
    s.add_argument("model")
    s.add_argument("p")
    s.add_argument("q")
    s.set_defaults(func=cmd_pert)

    s = sub.add_parser("net", parents=[common], help="size of an eps-net of 1-types over the empty set")
    s.add_argument("model")
    s.add_argument("--eps", type=float, required=True)
    s.add_argument("--cap", type=float, default=1.0)
    s.add_argument("--samples", type=int, default=0, help="random types to test against the net")
    s.set_defaults(func=cmd_net)
    return ap


def run(argv: list[str] | None = None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    try:
        report, code = args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NormSpecError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    report = {"v": J.SCHEMA_VERSION, "command": args.cmd, **report}
    text = J.dumps(report)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if args.verbose:
        print(f"{args.cmd}: exit {code}", file=sys.stderr)
    return code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
