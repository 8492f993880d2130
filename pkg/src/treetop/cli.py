"""Command-line interface: ``treetop gen|certify|analyze|export|compactify|kurepa``.

Exit codes: 0 pass, 1 certificate failure, 2 usage, 3 construction error,
4 schema error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import asdict, dataclass, field
from fractions import Fraction

from . import __version__
from .compactification import hausdorff_check, random_pairs, retraction_fibers, tree_instance
from .determinacy import (
    Certificate,
    build_2det_network,
    build_3det_family,
    signature_label,
    verify_separation,
)
from .embeddings import Witness, kurepa_refute
from .errors import SchemaError, TreetopError
from .expansions import (
    base_height_label,
    build_T1,
    build_T2,
    build_upsilon,
    expansion_family,
    lex_label,
)
from .labels import OrderLabel, height_label, verify_order_label
from .renorming import Bad, bad_points, kadec_witness, rho_check, t2_rho
from .report import jsonable
from .setfamily import canonical_set_family, closedness_check, tree_of_sets_check
from .tree import Pair, Tree, gen_tree
from .woset import rat

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_BUILD, EXIT_SCHEMA = 0, 1, 2, 3, 4
SEED_ENV = "TREETOP_SEED"


@dataclass
class RunConfig:
    seed: int = 0
    tolerance: str = "1/256"
    samples: int = 1000
    truncation: dict = field(default_factory=dict)
    inputs: dict = field(default_factory=dict)
    output: str = ""


class CliError(Exception):
    def __init__(self, code, message):
        super().__init__(message)
        self.code = code


# ---------------------------------------------------------------------------
# io


def _read_json(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise CliError(EXIT_USAGE, f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise CliError(EXIT_SCHEMA, f"{path}: invalid JSON: {exc}") from exc


def _dump(obj) -> str:
    return json.dumps(jsonable(obj), indent=1, sort_keys=True) + "\n"


def _emit(text: str, path):
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _load_tree(path) -> Tree:
    return Tree.from_json(_read_json(path))


def _load_label(path) -> OrderLabel:
    obj = _read_json(path)
    try:
        return OrderLabel.from_json(obj)
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"malformed label file: {exc}") from exc


def _seed(args) -> int:
    env = os.environ.get(SEED_ENV)
    raw = env if env is not None else args.seed
    try:
        seed = int(raw)
    except ValueError:
        raise CliError(EXIT_USAGE, f"seed must be an integer, got {raw!r}") from None
    if not 0 <= seed < 2**64:
        raise CliError(EXIT_USAGE, "seed must be a 64-bit natural")
    return seed


def _grid(raw):
    if raw is None:
        return 1
    parts = [p for p in raw.split(",") if p]
    if len(parts) == 1:
        return rat(parts[0])
    return [rat(p) for p in parts]


def _report(args, suite, result, ok, extra_inputs=None) -> dict:
    cfg = RunConfig(seed=getattr(args, "seed_value", 0),
                    tolerance=getattr(args, "tol", "1/256"),
                    samples=getattr(args, "samples", 0) or 0,
                    inputs={"tree": getattr(args, "inp", None), **(extra_inputs or {})},
                    output=getattr(args, "out", None) or "")
    return {"tool": "treetop", "version": __version__, "suite": suite,
            "config": asdict(cfg), "ok": ok, "result": result}


# ---------------------------------------------------------------------------
# labels chosen when none are supplied


def _default_label(tree: Tree) -> OrderLabel:
    """The tree's own ``h`` label, else the height label."""
    if "h" in tree.labels:
        return tree.labels["h"]
    return height_label(tree)


def _family(tree: Tree):
    if tree.meta.get("kind") in ("t1", "t2"):
        return expansion_family(tree)
    return canonical_set_family(tree)


def _lex(tree: Tree, args) -> OrderLabel:
    if args.labels:
        return _load_label(args.labels)
    if "g" in tree.labels:
        return tree.labels["g"]
    return lex_label(tree, base_height_label(tree))


# ---------------------------------------------------------------------------
# commands


def cmd_gen(args) -> int:
    kind = args.kind
    grid = _grid(args.grid)
    family = None
    if kind in ("sigma-q", "wq", "gamma"):
        tree = gen_tree(kind, args.depth, args.branching, grid, args.limits)
    elif kind == "t1":
        tree, family = build_T1(args.depth, args.branching, grid, args.limits)
    elif kind == "t2":
        tree, family = build_T2(args.depth, args.s_depth, grid, args.branching)
    else:
        tree = build_upsilon(args.depth, int(grid) if not isinstance(grid, list) else len(grid))
    _emit(tree.dumps() + "\n", args.out)
    if family is not None:
        path = args.family_out
        if path is None and args.out:
            stem = args.out[:-5] if args.out.endswith(".json") else args.out
            path = stem + ".family.json"
        if path:
            _emit(_dump(family), path)
    print(f"{kind}: {len(tree)} nodes", file=sys.stderr)
    return EXIT_OK


def cmd_certify(args) -> int:
    tree = _load_tree(args.inp)
    suite = args.suite
    extra = {"labels": args.labels, "cert": args.cert}
    if suite == "2det":
        h = _load_label(args.labels) if args.labels else _default_label(tree)
        cert = Certificate.from_json(_read_json(args.cert)) if args.cert \
            else build_2det_network(tree, h)
        sep = verify_separation(tree, cert)
        derived = signature_label(tree, cert)
        dv = verify_order_label(tree, derived, strict=True)
        ok = sep.ok and (args.cert is not None or sep.max_intersection_size <= 2)
        result = {"separation": sep, "sets": len(cert.sets),
                  "derived_label_strict": dv is None,
                  "derived_violation": dv}
    elif suite == "3det":
        g = _lex(tree, args)
        cert = Certificate.from_json(_read_json(args.cert)) if args.cert \
            else build_3det_family(tree, g, is_base=lambda t: not isinstance(tree.payload(t), Pair))
        first = OrderLabel("Q", {t: g.values[t][0] for t in tree.ids()})
        sep = verify_separation(tree, cert, first)
        ok = sep.ok
        result = {"separation": sep, "sets": len(cert.sets)}
    elif suite == "tree-of-sets":
        F = _family(tree)
        rep = tree_of_sets_check(F, args.samples, args.seed_value)
        clo = closedness_check(F, max(1, args.samples // 5), args.seed_value)
        ok = rep.ok and clo.ok
        result = {"axioms": rep, "closedness": clo}
    elif suite == "bad-points":
        f = _load_label(args.labels) if args.labels else \
            OrderLabel("Q", {t: Fraction(0) for t in tree.ids()})
        verdicts = bad_points(tree, f)
        ok = not any(isinstance(v, Bad) for v in verdicts)
        result = {"verdicts": verdicts}
    else:  # rho
        rho = _load_label(args.labels) if args.labels else t2_rho(tree)
        rep = rho_check(tree, rho, args.cantor_depth)
        ok = rep.ok
        result = rep
    _emit(_dump(_report(args, suite, result, ok, extra)), args.out)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_analyze(args) -> int:
    tree = _load_tree(args.inp)
    if args.op == "bad-points":
        f = _load_label(args.labels) if args.labels else _default_label(tree)
        result = {"verdicts": bad_points(tree, f)}
    elif args.op == "kadec":
        f = _load_label(args.labels) if args.labels else _default_label(tree)
        k = kadec_witness(tree, f)
        result = {"label": k, "verdicts": bad_points(tree, k)}
    else:
        rho = _load_label(args.labels) if args.labels else t2_rho(tree)
        result = rho_check(tree, rho, args.cantor_depth)
    _emit(_dump(_report(args, "analyze:" + args.op, result, True, {"labels": args.labels})),
          args.out)
    return EXIT_OK


def cmd_export(args) -> int:
    tree = _load_tree(args.inp)
    _emit(tree.to_dot(), args.out)
    return EXIT_OK


def cmd_compactify(args) -> int:
    tree = _load_tree(args.inp)
    layout = _read_json(args.coords)
    if isinstance(layout, list):
        layout = {"coords": layout}
    try:
        coords = [rat(c) for c in layout["coords"]]
        radii = [rat(r) for r in layout.get("radii", [])]
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"malformed coordinate file: {exc}") from exc
    inst = tree_instance(tree, coords, radii)
    fibers = retraction_fibers(inst)
    haus = hausdorff_check(inst, random_pairs(inst, args.pairs, args.seed_value))
    injective = len(set(inst.f.values())) == len(inst.X)
    ok = haus.ok and (not injective or max(fibers.values()) <= 2)
    result = {"fiber_sizes": sorted(fibers.values()), "max_fiber": max(fibers.values()),
              "injective": injective, "hausdorff": haus}
    _emit(_dump(_report(args, "compactify", result, ok, {"coords": args.coords})), args.out)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_kurepa(args) -> int:
    out = kurepa_refute(args.candidate, args.max_steps)
    result = {"outcome": out, "refuted": isinstance(out, Witness)}
    _emit(_dump(_report(args, "kurepa", result, True, {"candidate": args.candidate})),
          args.out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="treetop", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"treetop {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate a tree truncation")
    g.add_argument("--kind", required=True,
                   choices=["sigma-q", "wq", "gamma", "t1", "t2", "upsilon"])
    g.add_argument("--depth", type=int, default=2)
    g.add_argument("--branching", type=int, default=2)
    g.add_argument("--s-depth", type=int, default=2)
    g.add_argument("--grid", help="denominator d, or comma-separated offsets")
    g.add_argument("--limits", action="store_true", help="add one limit child per node")
    g.add_argument("--out")
    g.add_argument("--family-out")
    g.set_defaults(func=cmd_gen)

    def common(sp):
        sp.add_argument("--in", dest="inp", required=True)
        sp.add_argument("--out")
        sp.add_argument("--seed", default="0")
        sp.add_argument("--tol", default="1/256")

    c = sub.add_parser("certify", help="run a certificate suite")
    common(c)
    c.add_argument("--suite", required=True,
                   choices=["2det", "3det", "tree-of-sets", "bad-points", "rho"])
    c.add_argument("--labels")
    c.add_argument("--cert")
    c.add_argument("--samples", type=int, default=1000)
    c.add_argument("--cantor-depth", type=int, default=4)
    c.set_defaults(func=cmd_certify)

    a = sub.add_parser("analyze", help="renorming analyses")
    common(a)
    a.add_argument("--op", required=True, choices=["bad-points", "kadec", "rho"])
    a.add_argument("--labels")
    a.add_argument("--cantor-depth", type=int, default=4)
    a.set_defaults(func=cmd_analyze)

    e = sub.add_parser("export", help="export a tree")
    e.add_argument("--in", dest="inp", required=True)
    e.add_argument("--format", choices=["dot"], default="dot")
    e.add_argument("--out")
    e.set_defaults(func=cmd_export)

    m = sub.add_parser("compactify", help="fiber and separation audit")
    common(m)
    m.add_argument("--coords", required=True)
    m.add_argument("--pairs", type=int, default=100)
    m.set_defaults(func=cmd_compactify)

    k = sub.add_parser("kurepa", help="refute a candidate map into Q")
    k.add_argument("--candidate", required=True)
    k.add_argument("--max-steps", type=int, default=32)
    k.add_argument("--out")
    k.add_argument("--seed", default="0")
    k.set_defaults(func=cmd_kurepa)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if hasattr(args, "seed"):
            args.seed_value = _seed(args)
        return args.func(args)
    except CliError as exc:
        print(f"treetop: {exc}", file=sys.stderr)
        return exc.code
    except SchemaError as exc:
        print(f"treetop: schema error: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    except (TreetopError, ValueError) as exc:
        print(f"treetop: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_BUILD


if __name__ == "__main__":
    sys.exit(main())
