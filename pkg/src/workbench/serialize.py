"""File formats and name parsing shared by the CLI and the suite."""

from __future__ import annotations

import hashlib
import json
import os
import pickle
import platform
from pathlib import Path

import sympy

from . import __version__
from .chains import ChainComplex
from .kan import PosetDiagramV, diagram_from_json
from .lattice import (FinLattice, FinPoset, LatticeError, chain_lattice, diamond_m3, label_from_json,
                      label_to_json, lattice_from_json, pentagon_n5, powerset_lattice)
from .orbital import GMap, GroupError, OrbitCat, disjoint_union, free_orbit, group_by_name, point, to_point

TEST_GROUPS = ("C2", "C3", "C4", "S3")


class InputError(ValueError):
    """Malformed or unknown user input (CLI exit code 2)."""


def dump(obj, path=None) -> str:
    text = json.dumps(obj, indent=2, sort_keys=True, ensure_ascii=False) + "\n"
    if path is not None:
        Path(path).write_text(text, encoding="utf-8")
    return text


def load(path):
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except FileNotFoundError as e:
        raise InputError(f"no such file: {path}") from e
    except json.JSONDecodeError as e:
        raise InputError(f"{path}: not valid JSON ({e.msg} at line {e.lineno})") from e


def sub_seed(seed: int, name: str) -> int:
    """Per-property seed derived from the master seed."""
    h = hashlib.sha256(f"{seed}:{name}".encode()).hexdigest()
    return int(h[:12], 16)


def fingerprint() -> dict:
    return {"python": platform.python_version(), "sympy": sympy.__version__, "workbench": __version__}


# lattices --------------------------------------------------------------------

BUILTIN_LATTICES = {"M3": diamond_m3, "N5": pentagon_n5}


def load_lattice(spec, cls=FinLattice) -> FinPoset:
    """A JSON file {"elements", "covers"} or a builtin: M3, N5, chain:n, powerset:n / Pn."""
    p = Path(spec)
    if p.exists():
        try:
            return lattice_from_json(load(p), cls)
        except LatticeError:
            raise
        except (TypeError, KeyError, ValueError) as e:
            raise InputError(f"{spec}: malformed lattice file ({e})") from e
    name = p.stem if p.suffix == ".json" else str(spec)
    if name in BUILTIN_LATTICES:
        return BUILTIN_LATTICES[name]()
    if name.startswith("chain:"):
        return chain_lattice(int(name.split(":")[1]))
    if name.startswith("powerset:"):
        return powerset_lattice(int(name.split(":")[1]))
    if len(name) > 1 and name[0] == "P" and name[1:].isdigit():
        return powerset_lattice(int(name[1:]))
    raise InputError(f"unknown lattice {spec!r}")


def parse_element(L: FinPoset, text: str):
    """'1,2' for a subset, '' or '∅' for the empty set, or a JSON label."""
    text = text.strip()
    cands = []
    if text in ("", "∅", "{}"):
        cands.append(frozenset())
    else:
        try:
            cands.append(label_from_json(json.loads(text)))
        except json.JSONDecodeError:
            pass
        parts = [t.strip() for t in text.split(",") if t.strip()]
        cands.append(frozenset(int(t) if t.lstrip("-").isdigit() else t for t in parts))
        cands.append(text)
    for c in cands:
        if c in L.index:
            return c
    raise InputError(f"{text!r} is not an element of the lattice")


# groups and maps ------------------------------------------------------------------

def orbit_cat(name: str) -> OrbitCat:
    """The orbit category of a named group, memoized on disk under $WORKBENCH_CACHE when set."""
    try:
        G = group_by_name(name)
    except (GroupError, KeyError, ValueError) as e:
        raise InputError(f"unknown group {name!r}") from e
    cache = os.environ.get("WORKBENCH_CACHE")
    if not cache:
        return OrbitCat(G)
    path = Path(cache) / f"orbitcat-{name}-{__version__}.pickle"
    if path.exists():
        try:
            with path.open("rb") as fh:
                return pickle.load(fh)
        except (pickle.UnpicklingError, EOFError, AttributeError):
            pass
    O = OrbitCat(G)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(".tmp")
    with tmp.open("wb") as fh:
        pickle.dump(O, fh)
    tmp.replace(path)
    return O


def orbit_by_token(O: OrbitCat, token: str):
    token = token.strip()
    G = O.group
    if token in ("free", "e"):
        return free_orbit(G)
    if token in ("pt", "identity", "point"):
        return point(G)
    if token.startswith("orbit:"):
        i = int(token.split(":")[1])
        if not 0 <= i < len(O.objects):
            raise InputError(f"orbit index {i} out of range")
        return O.objects[i]
    for i in range(len(O.objects)):
        if O.name(i) == token or O.name(i).split("/")[-1] == token:
            return O.objects[i]
    raise InputError(f"unknown orbit {token!r}")


def parse_w(O: OrbitCat, spec: str) -> GMap:
    """'free', 'identity', 'orbit:1', or a '+'-separated sum of these, mapped to the point."""
    parts = [orbit_by_token(O, t) for t in spec.split("+") if t.strip()]
    if not parts:
        raise InputError("empty w")
    W = parts[0] if len(parts) == 1 else disjoint_union(*parts)[0]
    return to_point(W)


def w_name(O: OrbitCat, w: GMap) -> str:
    names = []
    for orb, H in w.source.orbits:
        names.append(O.name(next(i for i, K in enumerate(O.subgroups)
                                 if len(K) == len(H) and any(O.group.conjugate(g, H) == K for g in O.group.elements))))
    return "+".join(names)


# diagrams and complexes -----------------------------------------------------------

def diagram_to_file(D: PosetDiagramV) -> dict:
    return D.to_json()


def diagram_from_file(obj, check=True) -> PosetDiagramV:
    try:
        return diagram_from_json(obj, check=check)
    except (KeyError, TypeError, ValueError) as e:
        raise InputError(f"malformed diagram ({e})") from e


def complex_from_file(obj) -> ChainComplex:
    return ChainComplex.from_json(obj)


__all__ = ["InputError", "dump", "load", "sub_seed", "fingerprint", "load_lattice", "parse_element", "orbit_cat",
           "parse_w", "w_name", "diagram_to_file", "diagram_from_file", "complex_from_file", "label_to_json",
           "TEST_GROUPS"]
