"""Command-line entry point: `workbench lattice|cube|suite ...`.

Exit codes: 0 success, 1 a checked property is violated, 2 bad input.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import __version__
from .cubes import (CubeError, build_cube, cube_basechange_iso, global_points, sections,
                    singleton_basechange_check, singleton_inclusion)
from .lattice import (ExcisableStructure, FinLattice, LatticeError, NoComplement, NotDisjoint, check_galois,
                      complement, complement_decomposition, decomposition_round_trips, decomposition_triple,
                      disjoint_partners, distributivity_witness, face_colocalisation, face_map,
                      induced_excisable, join_galois_pair, label_from_json, label_to_json, show,
                      singleton_star, size_at_most, smash_adjunctions_hold, smash_localization,
                      smashing_subposet)
from .orbital import to_point
from .serialize import (TEST_GROUPS, InputError, dump, load, load_lattice, orbit_by_token, orbit_cat,
                        parse_element, parse_w, w_name)
from .suite import PROPERTIES, SuiteConfig, replay, run_suite

OK, VIOLATION, BAD_INPUT = 0, 1, 2


class Output:
    """Collects a JSON payload and text lines; writes one or the other."""

    def __init__(self, args):
        self.fmt = args.format
        self.out = args.out
        self.data = {}
        self.lines = []

    def line(self, s=""):
        self.lines.append(s)

    def emit(self):
        text = dump(self.data) if self.fmt == "json" else "\n".join(self.lines) + "\n"
        if self.out:
            Path(self.out).write_text(text, encoding="utf-8")
        else:
            sys.stdout.write(text)


# lattice -------------------------------------------------------------------

def _lattice(args):
    L = load_lattice(args.lattice)
    if not isinstance(L, FinLattice):
        raise InputError("not a lattice")
    return L


def _laws(L):
    """First violated law as (name, witness), or None."""
    trip = distributivity_witness(L)
    if trip is not None:
        return "distributivity", [label_to_json(x) for x in trip]
    try:
        comp = {x: complement(L, x) for x in L.labels}
    except NoComplement as e:
        return "complementation", label_to_json(e.element)
    for x in L.labels:
        if L.meet(x, x) != x or L.join(x, x) != x:
            return "idempotence", label_to_json(x)
        for y in L.labels:
            if L.join(x, L.meet(x, y)) != x or L.meet(x, L.join(x, y)) != x:
                return "absorption", [label_to_json(x), label_to_json(y)]
        if comp[comp[x]] != x:
            return "involution", label_to_json(x)
        if not check_galois(*join_galois_pair(L, x)):
            return "galois pair", label_to_json(x)
        if not smash_adjunctions_hold(smash_localization(L, x)):
            return "smash adjunctions", label_to_json(x)
        if not decomposition_round_trips(L, x):
            return "complement decomposition", label_to_json(x)
    return None


def lattice_verify(args, out):
    L = _lattice(args)
    bad = _laws(L)
    out.data = {"lattice": str(args.lattice), "size": len(L), "ok": bad is None, "degenerate": L.degenerate}
    if bad is None:
        out.line(f"{args.lattice}: {len(L)} elements, complementable, all laws hold")
        if L.degenerate:
            out.line("note: degenerate lattice (bottom = top), accepted")
        return OK
    law, wit = bad
    out.data.update({"failed": law, "witness": wit})
    out.line(f"{law} failed")
    out.line(f"witness: {wit}")
    return VIOLATION


def lattice_decompose(args, out):
    L = _lattice(args)
    x = parse_element(L, args.element)
    try:
        xc = complement(L, x)
        fwd, bwd = complement_decomposition(L, x)
    except NoComplement as e:
        out.data = {"element": label_to_json(x), "ok": False, "failed": "complementation"}
        out.line(str(e))
        return VIOLATION
    left, right = smashing_subposet(L, x), smashing_subposet(L, xc)
    ok = decomposition_round_trips(L, x)
    out.data = {"element": label_to_json(x), "complement": label_to_json(xc), "sizes": [len(L), len(left), len(right)],
                "round_trip": ok,
                "map": [[label_to_json(a), [label_to_json(u) for u in fwd(a)]] for a in L.labels]}
    out.line(f"x = {show(x)}, x^c = {show(xc)}")
    out.line(f"L ({len(L)}) ≅ L_x ({len(left)}) × L_x^c ({len(right)})")
    for a in L.labels:
        u, v = fwd(a)
        out.line(f"  {show(a):12} ↦ ({show(u)}, {show(v)})")
    out.line("round trips: " + ("ok" if ok else "FAILED"))
    return OK if ok else VIOLATION


def lattice_faces(args, out):
    L = _lattice(args)
    a = parse_element(L, args.element)
    rows = []
    ok = True
    for d in disjoint_partners(L, a):
        try:
            t = decomposition_triple(L, a, d)
            phi = face_map(L, a, d)
        except (NotDisjoint, NoComplement) as e:
            raise InputError(str(e)) from e
        adj = check_galois(*face_colocalisation(L, a, d))
        ok = ok and adj
        rows.append({"d": label_to_json(d), "z": label_to_json(t.z),
                     "image": sorted((label_to_json(y) for y in phi.image()), key=str), "adjoint": adj})
        out.line(f"d = {show(d):10} z = {show(t.z):10} face {{{', '.join(show(y) for y in phi.image())}}}"
                 + ("" if adj else "  colocalisation FAILED"))
    out.data = {"a": label_to_json(a), "faces": rows, "ok": ok}
    out.lines.insert(0, f"faces of type {show(a)}: {len(rows)}")
    return OK if ok else VIOLATION


def _sigma(L, spec):
    if spec in ("singletons", "star"):
        return singleton_star(L)
    if spec.startswith("size:"):
        return size_at_most(L, int(spec.split(":")[1]))
    elems = [label_from_json(v) for v in load(spec)] if Path(spec).exists() else \
        [parse_element(L, t) for t in spec.split(";")]
    return ExcisableStructure(L, elems)


def lattice_excisable(args, out):
    L = _lattice(args)
    try:
        sigma = _sigma(L, args.sigma)
    except LatticeError as e:
        out.data = {"ok": False, "failed": e.axiom, "witness": None if e.witness is None else label_to_json(e.witness)}
        out.line(str(e))
        return VIOLATION
    induced = {}
    for x in L.labels:
        try:
            induced[x] = induced_excisable(L, sigma, x)
        except LatticeError as e:
            out.data = {"ok": False, "failed": f"induced structure at {show(x)}: {e.axiom}"}
            out.line(out.data["failed"])
            return VIOLATION
    out.data = {"ok": True, "sigma": sorted((label_to_json(s) for s in sigma.subset), key=str),
                "induced": {show(x): len(s.subset) for x, s in induced.items()}}
    out.line(f"{sigma!r} is downward closed ({len(sigma.subset)} of {len(L)})")
    for x, s in induced.items():
        out.line(f"  σ_{show(x)}: {s!r}")
    return OK


# cube ----------------------------------------------------------------------

def _group_w(args):
    O = orbit_cat(args.group)
    return O, parse_w(O, args.w)


def _level_label(S, k):
    i, _ = S.levels[k]
    if S.V.size == 1:
        return "pt" if i == S.O.terminal else S.O.name(i)
    return S.level_name(k)


def cube_build(args, out):
    O, w = _group_w(args)
    cube = build_cube(O, w)
    ok = cube.check_functorial()
    table = {_level_label(cube.S, k): n for k, n in cube.sizes().items()}
    out.data = {"group": args.group, "w": w_name(O, w), "fibres": table, "functorial": ok}
    out.line(f"cube of w = {w_name(O, w)} over {args.group}")
    for name, n in table.items():
        out.line(f"  {name:12} {n}")
    return OK if ok else VIOLATION


def cube_points(args, out):
    O, w = _group_w(args)
    cube = build_cube(O, w)
    pts = global_points(cube)
    top = cube.fibre(cube.S.terminal).top
    names = ["𝟙" if x == top and x else show(x) for _, x in pts]
    out.data = {"group": args.group, "w": w_name(O, w), "global_points": names}
    out.line("global points: " + ", ".join(names))
    return OK


def cube_singletons(args, out):
    O, w = _group_w(args)
    cube = build_cube(O, w)
    phi = singleton_inclusion(O, w, cube)
    rows = {}
    for k in range(len(cube.S)):
        secs = sections(cube.S, k, w)
        rows[_level_label(cube.S, k)] = {"sections": len(secs), "orbits": cube.n_orbits(k),
                                         "images": [show(phi(k, s.map)) for s in secs]}
    ok = phi.is_natural() and phi.is_fully_faithful()
    out.data = {"group": args.group, "w": w_name(O, w), "levels": rows, "natural_fully_faithful": ok}
    out.line(f"singletons of w = {w_name(O, w)}: natural and fully faithful: {ok}")
    for name, r in rows.items():
        out.line(f"  {name:12} {r['sections']} of {r['orbits']} orbits  {' '.join(r['images']) or '-'}")
    return OK if ok else VIOLATION


def cube_basechange(args, out):
    O, w = _group_w(args)
    bs = [orbit_by_token(O, args.b)] if args.b else list(O.objects)
    rows = {}
    for B in bs:
        b = to_point(B)
        iso = cube_basechange_iso(O, w, b)
        rows[O.name(O.index_of(B))] = {"levels": len(iso.maps), "singletons": singleton_basechange_check(O, w, b)}
    ok = all(r["singletons"] for r in rows.values())
    out.data = {"group": args.group, "w": w_name(O, w), "basechange": rows, "ok": ok}
    for name, r in rows.items():
        out.line(f"along {name}: cube iso on {r['levels']} levels, singletons "
                 + ("compatible" if r["singletons"] else "NOT compatible"))
    return OK if ok else VIOLATION


# suite ---------------------------------------------------------------------

def suite_run(args, out):
    only = tuple(p.strip() for p in args.only.split(",") if p.strip()) if args.only else None
    groups = tuple(g for spec in args.group for g in spec.split(",")) if args.group else ("C2",)
    cfg = SuiteConfig(groups=groups, seed=args.seed, max_cube_dim=args.max_cube_dim, max_dim=args.max_dim,
                      stage_cap=args.stage_cap, only=only)
    cfg.validate()
    report = run_suite(cfg)
    wdir = Path(args.witness_dir) if args.witness_dir else (Path(args.out).parent if args.out else Path("."))
    for name, r in sorted(report.results.items()):
        extra = {k: v for k, v in r.details.items() if k.endswith(":witness")}
        files = {}
        if r.witness is not None:
            files["witness_file"] = (f"{name}.witness.json", r.witness)
        for k, v in sorted(extra.items()):
            files[k.replace(":witness", "") + "_witness_file"] = (f"{name}.{k.split(':')[0]}.witness.json", v)
        for key, (fname, obj) in files.items():
            wdir.mkdir(parents=True, exist_ok=True)
            dump(obj, wdir / fname)
            r.details[key] = fname
    out.data = report.to_json(timings=args.timings)
    out.lines = report.to_text(timings=args.timings).rstrip("\n").split("\n")
    return OK if report.ok else VIOLATION


def suite_replay(args, out):
    w = load(args.witness)
    reproduced, msg = replay(w)
    out.data = {"kind": w.get("kind"), "reproduced": reproduced, "message": msg}
    out.line(("reproduced: " if reproduced else "not reproduced: ") + msg)
    return VIOLATION if reproduced else OK


def suite_list(args, out):
    out.data = {"properties": sorted(PROPERTIES), "groups": list(TEST_GROUPS)}
    out.lines = sorted(PROPERTIES)
    return OK


# parser --------------------------------------------------------------------

def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("json", "text"), default="text")
    common.add_argument("--out", help="write the report here instead of stdout")

    p = argparse.ArgumentParser(prog="workbench", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"workbench {__version__}")
    top = p.add_subparsers(dest="area", required=True)

    lat = top.add_parser("lattice", help="finite lattices and excisable structures").add_subparsers(
        dest="cmd", required=True)
    for name, fn, help_ in (("verify", lattice_verify, "check the lattice laws exhaustively"),
                            ("decompose", lattice_decompose, "L ≅ L_x × L_x^c at an element"),
                            ("faces", lattice_faces, "faces of a given type"),
                            ("excisable", lattice_excisable, "validate an excisable structure")):
        sp = lat.add_parser(name, parents=[common], help=help_)
        sp.add_argument("lattice", help="JSON file or builtin (M3, N5, chain:n, powerset:n, Pn)")
        if name in ("decompose", "faces"):
            sp.add_argument("--element", required=True, help="e.g. 1,2 for a subset, or a JSON label")
        if name == "excisable":
            sp.add_argument("--sigma", default="singletons",
                            help="singletons, size:k, a JSON file of labels, or ';'-separated elements")
        sp.set_defaults(fn=fn)

    cube = top.add_parser("cube", help="parametrised cubes over orbit categories").add_subparsers(
        dest="cmd", required=True)
    for name, fn in (("build", cube_build), ("points", cube_points), ("singletons", cube_singletons),
                     ("basechange", cube_basechange)):
        sp = cube.add_parser(name, parents=[common])
        sp.add_argument("--group", default="C2", help="C1, C2, C3, C4, S3, ...")
        sp.add_argument("--w", default="free", help="free, identity, orbit:i, or a '+'-sum")
        if name == "basechange":
            sp.add_argument("--b", help="orbit to base change along (default: all)")
        sp.set_defaults(fn=fn)

    suite = top.add_parser("suite", help="the property battery").add_subparsers(dest="cmd", required=True)
    sp = suite.add_parser("run", parents=[common])
    sp.add_argument("--group", action="append", help=f"one of {', '.join(TEST_GROUPS)}; repeatable")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--max-cube-dim", type=int, default=5)
    sp.add_argument("--max-dim", type=int, default=2, help="largest sampled vector space dimension")
    sp.add_argument("--stage-cap", type=int, default=8)
    sp.add_argument("--only", help="comma-separated property names")
    sp.add_argument("--witness-dir", help="where witness files go (default: next to --out)")
    sp.add_argument("--timings", action="store_true", help="include wall-clock times (breaks byte determinism)")
    sp.set_defaults(fn=suite_run)
    sp = suite.add_parser("replay", parents=[common])
    sp.add_argument("witness", help="a witness file written by `suite run`")
    sp.set_defaults(fn=suite_replay)
    sp = suite.add_parser("list", parents=[common])
    sp.set_defaults(fn=suite_list)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return BAD_INPUT if e.code not in (0, None) else OK
    out = Output(args)
    try:
        code = args.fn(args, out)
    except (InputError, LatticeError, CubeError) as e:
        print(f"error: {e}", file=sys.stderr)
        return BAD_INPUT
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return BAD_INPUT
    out.emit()
    return code


if __name__ == "__main__":
    sys.exit(main())
