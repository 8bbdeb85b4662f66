"""Command-line front end.

Exit codes: 0 all checks passed, 1 a mathematical expectation failed,
2 input or usage error.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import discriminant as dsc
from . import strata
from .fields import GF, QQ
from .instances import InstanceError, digest, dump_instance, load_instance
from .irreducibility import DEFAULT_PRIME, OracleError
from .polymatroid import (
    PolymatroidError,
    SubspaceTuple,
    check_rank_axioms,
    defect_of,
    dual_realization,
    flats_lattice,
    is_bk,
    is_irreducible,
    label,
    subsets,
    verify_dual_equality,
)

VERIFY_TRIALS = {"lemma3": 10_000, "prop4": 1000, "lemma5": 200, "prop1": 1000,
                 "lemma2": 0, "prop6": 0}


class UsageError(Exception):
    pass


class Report:
    def __init__(self, command: str, seed=None, prime=None, instance_digest=None):
        self.body = {"command": command, "instance_digest": instance_digest,
                     "seed": seed, "prime": prime, "results": {}, "checks": []}
        self.timings = {}

    def result(self, key, value):
        self.body["results"][key] = value

    def check(self, name: str, passed: bool, detail=None):
        self.body["checks"].append({"name": name, "passed": bool(passed), "detail": detail})

    @property
    def passed(self) -> bool:
        return all(c["passed"] for c in self.body["checks"])

    def to_json(self) -> dict:
        return {**self.body, "timings": self.timings}


def report_body(text: str) -> str:
    """Strip timing information from rendered output, for determinism checks."""
    try:
        doc = json.loads(text)
        doc.pop("timings", None)
        return json.dumps(doc, sort_keys=True)
    except json.JSONDecodeError:
        return "\n".join(l for l in text.splitlines() if not l.startswith("timing"))


def render_text(rep: Report) -> str:
    b = rep.body
    lines = [f"command: {b['command']}"]
    for k in ("instance_digest", "seed", "prime"):
        if b[k] is not None:
            lines.append(f"{k}: {b[k]}")
    for k, v in b["results"].items():
        lines.append(f"{k}: {v if isinstance(v, str) else json.dumps(v, sort_keys=True)}")
    for c in b["checks"]:
        tail = f" ({c['detail']})" if c["detail"] is not None else ""
        lines.append(f"[{'PASS' if c['passed'] else 'FAIL'}] {c['name']}{tail}")
    for k, v in rep.timings.items():
        lines.append(f"timing {k}: {v:.3f}s")
    return "\n".join(lines)


# --- helpers ---------------------------------------------------------------

def _as_subspaces(obj) -> SubspaceTuple:
    return dsc.spans(obj) if isinstance(obj, dsc.LatticePointTuple) else obj


def _expectations(meta: dict, args) -> dict:
    exp = dict(meta.get("expected", {}))
    if getattr(args, "expect", None):
        try:
            exp.update(json.loads(Path(args.expect).read_text()))
        except (OSError, json.JSONDecodeError) as e:
            raise InstanceError(f"cannot read expectations from {args.expect}: {e}") from None
    return exp


def _expect(rep: Report, exp: dict, key: str, actual):
    if key in exp:
        rep.check(f"expected {key} = {exp[key]}", exp[key] == actual, f"got {actual}")


def _load(args):
    if not args.instance:
        raise UsageError("an instance file is required")
    obj, meta, doc = load_instance(args.instance)
    return obj, meta, digest(doc)


def _irr_bk(t: SubspaceTuple) -> bool:
    return is_bk(t)[0] and is_irreducible(t)[0]


# --- commands -------------------------------------------------------------

def cmd_analyze(args) -> Report:
    obj, meta, dg = _load(args)
    t = _as_subspaces(obj)
    rep = Report("analyze", instance_digest=dg)
    if len(t) > 16:
        raise UsageError("analyze enumerates all subsets; ground set must be <= 16")
    rep.result("dims", t.dims)
    rep.result("defects", {",".join(map(str, label(s))) or "{}": defect_of(t, s)
                           for s in subsets(len(t))})
    irr, w_irr = is_irreducible(t)
    bk, w_bk = is_bk(t)
    rep.result("irreducible", {"flag": irr, "witness": label(w_irr) if w_irr else None})
    rep.result("bk", {"flag": bk, "witness": label(w_bk) if w_bk else None})
    lattice = flats_lattice(t)
    rep.result("flats", [f.to_json() for f in lattice.flats])
    dual = verify_dual_equality(t)
    rep.result("dual_equality", dual)
    rep.check("dual realization has the same rank function", not dual["violations"],
              f"{dual['checked']} subsets")
    problems = check_rank_axioms(t) if len(t) <= 10 else []
    rep.check("rank function is normalized, monotone and submodular", not problems,
              problems[:3] or None)
    if isinstance(obj, dsc.LatticePointTuple):
        rep.result("tau_ranks", list(dsc.tau_blocks(obj).ranks))
    exp = _expectations(meta, args)
    _expect(rep, exp, "irreducible", irr)
    _expect(rep, exp, "bk", bk)
    _expect(rep, exp, "flats", len(lattice))
    return rep


def _prime_tuple(t: SubspaceTuple, p: int) -> SubspaceTuple:
    if t.field.is_prime:
        if t.field.modulus != p:
            raise UsageError(f"instance lives over {t.field}; pass --prime {t.field.modulus}")
        return t
    return t.reduce_mod(p)


def cmd_verify(args) -> Report:
    which = args.which
    trials = args.trials if args.trials is not None else VERIFY_TRIALS[which]
    seed = args.seed
    p = args.prime or strata.MIN_SAMPLING_PRIME
    if which == "prop1":
        return _verify_prop1(args, trials, seed)
    obj, meta, dg = _load(args)
    t = _as_subspaces(obj)
    rep = Report(f"verify {which}", seed=seed,
                 prime=p if which in ("lemma3", "prop4", "lemma5") else None, instance_digest=dg)
    if which == "lemma2":
        res = verify_dual_equality(t)
        rep.result("dual_equality", res)
        rep.check("rank equals codimension of intersected annihilators", not res["violations"],
                  f"{res['checked']} subsets")
    elif which == "lemma3":
        tp = _prime_tuple(t, p)
        rng = np.random.default_rng(seed)
        X = rng.integers(0, p, size=(trials, tp.ambient_dim))
        masks, violations = strata.classify_points(dual_realization(tp), X)
        hist = {}
        for m in masks:
            key = ",".join(str(i + 1) for i in range(len(tp)) if int(m) >> i & 1) or "{}"
            hist[key] = hist.get(key, 0) + 1
        rep.result("points", trials)
        rep.result("strata_hits", dict(sorted(hist.items())))
        rep.result("violations", violations)
        rep.check("every membership set is a flat", not violations, f"{trials} points")
    elif which == "prop4":
        tp = _prime_tuple(t, p)
        d = strata.DualOracle(dual_realization(tp))
        lattice = flats_lattice(tp)
        samples = [strata.sample_stratum(d, f, p, trials, seed + k).to_json()
                   for k, f in enumerate(lattice.flats)]
        rep.result("strata", samples)
        rng = np.random.default_rng(seed)
        X = rng.integers(0, p, size=(trials, tp.ambient_dim))
        masks, violations = strata.classify_points(d, X)
        flat_masks = {sum(1 << i for i in f.members) for f in lattice.flats}
        covered = all(int(m) in flat_masks for m in masks)
        rep.check("random points fall in exactly one stratum indexed by a flat",
                  covered and not violations, f"{trials} points")
    elif which == "lemma5":
        tp = _prime_tuple(t, p)
        d = strata.DualOracle(dual_realization(tp))
        checked, violations = 0, []
        for k, f in enumerate(flats_lattice(tp).flats):
            if f.rank == tp.ambient_dim:
                continue
            s = strata.sample_stratum(d, f, p, trials, seed + k)
            for l in s.points[:25]:
                try:
                    strata.fiber_dimension(tp, l, oracle=d)
                except strata.StrataViolation as e:
                    violations.append(str(e))
                checked += 1
        rep.result("points_checked", checked)
        rep.result("violations", violations)
        rep.check("fiber dimension equals dim L - n + |F|", not violations and checked > 0,
                  f"{checked} points")
    elif which == "prop6":
        try:
            table = strata.stratum_dimensions(t, seed=seed)
            rep.result("table", table.to_json())
            rep.check("dim Q_F = dim B_F + fiber rank = dim L - defect(F)", True)
        except strata.StrataViolation as e:
            rep.check("dim Q_F = dim B_F + fiber rank = dim L - defect(F)", False, str(e))
        if _irr_bk(t):
            try:
                rep.result("projection_bound", strata.strata_projection_bound(t, seed=seed))
                rep.check("only the bottom stratum can reach codimension one", True)
            except strata.StrataViolation as e:
                rep.check("only the bottom stratum can reach codimension one", False, str(e))
    return rep


def _verify_prop1(args, trials, seed) -> Report:
    if args.dims:
        dims = [int(v) for v in args.dims.split(",")]
        n = args.n or max(len(dims), max(dims))
        dg = None
    else:
        obj, meta, dg = _load(args)
        t = _as_subspaces(obj)
        dims, n = t.dims, t.ambient_dim
    bound = args.bound or 9
    res = dsc.random_tuple_experiment(dims, n, trials=trials, bound=bound, seed=seed)
    rep = Report("verify prop1", seed=seed, instance_digest=dg)
    rep.result("dims", dims)
    rep.result("ambient", n)
    rep.result("bound", bound)
    rep.result("experiment", res.to_json())
    rep.check("random tuples are irreducible in at least 99% of trials", res.fraction >= 0.99,
              f"fraction {res.fraction}")
    return rep


def cmd_theorem(args) -> Report:
    obj, meta, dg = _load(args)
    prime = args.prime or DEFAULT_PRIME
    rep = Report(f"theorem {args.which}", seed=args.seed, prime=prime, instance_digest=dg)
    exp = _expectations(meta, args)
    if args.which == "a":
        t = _as_subspaces(obj)
        if t.field.is_prime and args.prime is None:
            prime = t.field.modulus
            rep.body["prime"] = prime
        det = dsc.restricted_determinant(t)
        rep.result("determinant", str(det))
        v = dsc.theorem_a_check(t, sections=args.sections, seed=args.seed, prime=prime)
        rep.result("verdict", v.to_json())
        if _irr_bk(t):
            rep.check("irreducible BK tuple gives an absolutely irreducible determinant",
                      v.verdict == "absolutely-irreducible", v.verdict)
        _expect(rep, exp, "theorem_a", v.verdict)
    else:
        if not isinstance(obj, dsc.LatticePointTuple):
            raise UsageError("theorem b needs a lattice-tuple instance")
        v = dsc.theorem_b_check(obj, sections=args.sections, seed=args.seed, prime=prime)
        rep.result("G_pi", str(dsc.build_instance(obj).G_pi))
        rep.result("verdict", v.to_json())
        rep.check("discriminantal polynomial is absolutely irreducible",
                  v.verdict == "absolutely-irreducible", v.verdict)
        _expect(rep, exp, "theorem_b", v.verdict)
    _expect(rep, exp, "verdict", v.verdict)
    return rep


def cmd_discriminant(args) -> Report:
    obj, meta, dg = _load(args)
    if not isinstance(obj, dsc.LatticePointTuple):
        raise UsageError("discriminant commands need a lattice-tuple instance")
    exp = _expectations(meta, args)
    action = args.action
    if action == "build":
        rep = Report("discriminant build", instance_digest=dg)
        inst = dsc.build_instance(obj)
        rep.result("instance", inst.to_json())
        rep.result("matrix_space_dim", dsc.tau_blocks(obj).matrix_space_dim)
        rep.check("G_pi does not involve the constant coefficients",
                  not (inst.G_pi.support() & set(inst.origin_vars)))
    elif action == "classify":
        rep = Report("discriminant classify", instance_digest=dg)
        cls = dsc.classify_lir(obj)
        rep.result("classification", cls.to_json())
        _expect(rep, exp, "kind", cls.kind)
    elif action == "codim":
        prime = args.prime or dsc.MIN_Z_PRIME
        trials = args.trials if args.trials is not None else 20
        rep = Report("discriminant codim", seed=args.seed, prime=prime, instance_digest=dg)
        sp = dsc.check_irreducible_bk(obj)
        inst = dsc.build_instance(obj)
        est = dsc.estimate_codim(inst, prime, trials, args.seed)
        rep.result("estimate", est.to_json())
        rep.check("majority of at least 80%", est.agreement >= 0.8, f"{est.agreement:.2f}")
        rep.check("discard rate below 20%", est.discard_rate < 0.2, f"{est.discard_rate:.2f}")
        if obj.ambient_rank <= dsc.MAX_LIR_RANK and all(len(A) <= dsc.MAX_LIR_SET for A in obj.sets):
            kind = dsc.classify_lir(obj).kind
            want = (2, 1) if kind == "lir" else (1, 0)
            rep.result("kind", kind)
            rep.check(f"{kind} tuple has codimension {want[0]} and fiber dimension {want[1]}",
                      (est.codim, est.fiber_dim) == want, f"got {est.codim}, {est.fiber_dim}")
        _expect(rep, exp, "codim", est.codim)
        _expect(rep, exp, "fiber_dim", est.fiber_dim)
    else:
        rep = Report("discriminant eliminate", instance_digest=dg)
        if obj.ambient_rank != 1 or len(obj) != 1:
            raise UsageError("elimination is only available for one set in rank 1")
        disc = dsc.univariate_discriminant([a[0] for a in obj.sets[0]])
        rep.result("discriminant", str(disc))
        _expect(rep, exp, "discriminant", str(disc))
    return rep


def cmd_random(args) -> tuple[dict, list[str]]:
    dims = [int(v) for v in args.dims.split(",")]
    n = args.n or max(len(dims), max(dims))
    bound = args.bound or 3
    rng = np.random.default_rng(args.seed)
    warnings = []
    if any(d < 2 for d in dims):
        warnings.append("dims contain an entry below 2: outside the generic irreducibility hypothesis")
    if any(d > n for d in dims):
        raise UsageError("a dimension exceeds the ambient rank")
    gen = {"kind": args.kind, "dims": dims, "n": n, "bound": bound, "seed": args.seed}
    if args.kind == "subspace":
        field = QQ if args.field == "rationals" else GF(int(args.field.split(":")[1]))
        gens = [dsc.random_sublattice_generators(rng, d, n, bound) for d in dims]
        obj = SubspaceTuple.from_generators(gens, n, field)
        doc = obj.to_json()
        doc["subspaces"] = gens if field == QQ else doc["subspaces"]
    else:
        obj = dsc.random_lattice_tuple(rng, dims, n, bound)
        doc = obj.to_json()
    meta = {"name": f"random-{args.kind}-{'-'.join(map(str, dims))}-seed{args.seed}",
            "generator": gen}
    if warnings:
        meta["warnings"] = warnings
    doc.update(meta)
    return doc, warnings


# --- argument parsing -------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--prime", type=int, default=None)
    common.add_argument("--trials", type=int, default=None)
    common.add_argument("--sections", type=int, default=11)
    common.add_argument("--expect", default=None, help="JSON file of expected results")
    common.add_argument("--format", choices=("text", "json"), default="text")

    ap = argparse.ArgumentParser(prog="detdisc", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", parents=[common], help="defects, flats, dual-rank check")
    p.add_argument("instance")

    p = sub.add_parser("verify", parents=[common], help="run a property suite")
    p.add_argument("which", choices=("lemma2", "lemma3", "prop4", "lemma5", "prop6", "prop1"),
                   help="lemma2: dual rank equality; lemma3: membership sets are flats; "
                        "prop4: strata partition; lemma5: fiber dimensions; "
                        "prop6: stratum dimension table; prop1: random-tuple irreducibility")
    p.add_argument("instance", nargs="?")
    p.add_argument("--dims", default=None, help="comma-separated dims for prop1")
    p.add_argument("--n", type=int, default=None, help="ambient rank (default: number of dims)")
    p.add_argument("--bound", type=int, default=None)

    p = sub.add_parser("theorem", parents=[common], help="irreducibility verdicts")
    p.add_argument("which", choices=("a", "b"))
    p.add_argument("instance")

    p = sub.add_parser("discriminant", parents=[common], help="singular-point polynomial tools")
    p.add_argument("action", choices=("build", "classify", "codim", "eliminate"))
    p.add_argument("instance")

    p = sub.add_parser("random", parents=[common], help="generate a random instance")
    p.add_argument("kind", choices=("subspace", "lattice"))
    p.add_argument("--dims", required=True)
    p.add_argument("--n", type=int, default=None, help="ambient rank (default: number of dims)")
    p.add_argument("--bound", type=int, default=None)
    p.add_argument("--field", default="rationals", help="'rationals' or 'prime:P'")
    p.add_argument("--out", default=None)
    return ap


COMMANDS = {"analyze": cmd_analyze, "verify": cmd_verify, "theorem": cmd_theorem,
            "discriminant": cmd_discriminant}


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return 2 if e.code else 0
    try:
        if args.command == "random":
            doc, warnings = cmd_random(args)
            text = json.dumps(doc, indent=1, sort_keys=True)
            if args.out:
                Path(args.out).write_text(text + "\n")
            else:
                print(text)
            for w in warnings:
                print(f"warning: {w}", file=sys.stderr)
            return 0
        t0 = time.perf_counter()
        rep = COMMANDS[args.command](args)
        rep.timings["total"] = time.perf_counter() - t0
    except (InstanceError, UsageError, PolymatroidError, dsc.PreconditionError,
            OracleError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    if args.format == "json":
        print(json.dumps(rep.to_json(), indent=1, sort_keys=True))
    else:
        print(render_text(rep))
    return 0 if rep.passed else 1


if __name__ == "__main__":
    sys.exit(main())
