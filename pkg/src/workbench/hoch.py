"""Coefficient systems of chain complexes over a slice of the orbit category.

A coefficient system is contravariant on O_{/V}: X(f): X(t) → X(s) for a
slice map f: s → t.  On top of the chain-level engine this module builds

  * Σ^w, levelwise homotopy colimits over the top-punctured fibres of the
    w-cube, with restriction maps from normalized-chain functoriality;
  * Ω^w and the unit X → Ω^wΣ^wX, as homotopy limits over comma categories
    of the total category of the cube (right adjoints are not fibrewise);
  * sphere dimensions and the sphere calculus identities;
  * indexed coproducts and products w_!, w_* as comma-category homotopy
    (co)limits, and the norm between them;
  * the α and β cubes, with singleton cocartesian and cartesian checks;
  * a seeded probe for failure of the suspension-loop unit.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction

from .chains import (ChainComplex, ChainDiagram, ChainMap, direct_sum, hocolim_induced, hocolim_poset,
                     holim_poset, identity_map, zero_map)
from .cubes import ParamCube, SliceCat, build_cube, graph_orbit, orbit_object, sections
from .eicat import Cat, Functor, hocolim_cocone_map, hocolim_ei, holim_cone_map, holim_ei
from .lattice import FinPoset, powerset_lattice
from .linalg import Mat
from .orbital import GMap, OrbitCat, disjoint_union, point


class HochError(ValueError):
    pass


class ExhaustedNoWitness(RuntimeError):
    def __init__(self, tried):
        self.tried = tried
        super().__init__(f"no failing unit among {tried} samples")


def _cat(S: SliceCat) -> Cat:
    c = getattr(S, "_eicat", None)
    if c is None:
        c = Cat.from_fincat(S.cat)
        S._eicat = c
    return c


# coefficient systems ----------------------------------------------------------

class CoefficientSystem:
    def __init__(self, S: SliceCat, objects, maps, check=True):
        self.S = S
        self.objects = list(objects)
        self.maps = {}
        C = S.cat
        for m in range(len(C.morphisms)):
            f = maps.get(m)
            src, tgt = C.src(m), C.tgt(m)
            if f is None:
                f = zero_map(self.objects[tgt], self.objects[src])
            self.maps[m] = f
        if check:
            w = self.functoriality_witness()
            if w is not None:
                raise HochError(f"functoriality fails at {w}")

    def functoriality_witness(self):
        C = self.S.cat
        for k, i in enumerate(C.identities):
            if self.maps[i] != identity_map(self.objects[k]):
                return ("identity", k)
        for (g, f), h in C.comp.items():
            if self.maps[f].compose(self.maps[g]) != self.maps[h]:
                return ("composite", g, f)
        for f in self.maps.values():
            if not f.is_chain_map():
                return ("chain map", f)
        return None

    def functor(self) -> Functor:
        """As a covariant functor on the opposite slice category."""
        return Functor(_cat(self.S).op(), self.objects, self.maps)

    def total_dim(self) -> int:
        return sum(X.total_dim() for X in self.objects)

    def homology(self) -> dict:
        return {self.S.level_name(k): X.homology() for k, X in enumerate(self.objects)}

    def shift(self, k=1) -> "CoefficientSystem":
        objs = [X.shift(k) for X in self.objects]
        C = self.S.cat
        maps = {m: ChainMap(objs[C.tgt(m)], objs[C.src(m)], {n + k: M for n, M in f.comps.items()}, check=False)
                for m, f in self.maps.items()}
        return CoefficientSystem(self.S, objs, maps, check=False)

    def to_json(self) -> dict:
        return {"levels": [self.S.level_name(k) for k in range(len(self.objects))],
                "objects": [X.to_json() for X in self.objects],
                "maps": {str(m): {str(n): M.to_strings() for n, M in sorted(f.comps.items()) if M.rows and M.cols}
                         for m, f in self.maps.items()}}

    @classmethod
    def from_json(cls, S: SliceCat, obj) -> "CoefficientSystem":
        objs = [ChainComplex.from_json(o) for o in obj["objects"]]
        C = S.cat
        maps = {}
        for m in range(len(C.morphisms)):
            src, tgt = C.src(m), C.tgt(m)
            comps = {}
            for n, rows in obj["maps"].get(str(m), {}).items():
                n = int(n)
                comps[n] = Mat.from_rows(rows, m=objs[src].dim(n), n=objs[tgt].dim(n))
            maps[m] = ChainMap(objs[tgt], objs[src], comps)
        return cls(S, objs, maps)


def unit_system(S: SliceCat, degree=0) -> CoefficientSystem:
    X = ChainComplex.concentrated(1, degree)
    return CoefficientSystem(S, [X] * len(S), {m: identity_map(X) for m in range(len(S.cat.morphisms))}, check=False)


def zero_system(S: SliceCat) -> CoefficientSystem:
    Z = ChainComplex.zero()
    return CoefficientSystem(S, [Z] * len(S), {}, check=False)


def representable(S: SliceCat, c: int, degree=0) -> CoefficientSystem:
    """k ↦ Q[Hom(k, c)], restriction by precomposition."""
    C = S.cat
    homs = [C.hom_ids(k, c) for k in range(len(S))]
    objs = [ChainComplex.concentrated(len(h), degree) for h in homs]
    maps = {}
    for m in range(len(C.morphisms)):
        s, t = C.src(m), C.tgt(m)
        pos = {h: j for j, h in enumerate(homs[s])}
        ent = {(pos[C.comp[(h, m)]], j): 1 for j, h in enumerate(homs[t])}
        maps[m] = ChainMap(objs[t], objs[s], {degree: Mat.from_dict(ent, len(homs[s]), len(homs[t]))}, check=False)
    return CoefficientSystem(S, objs, maps, check=False)


def representable_map(S: SliceCat, c: int, c2: int, coeffs: dict, degree=0):
    """Q[Hom(−, c)] → Q[Hom(−, c2)] given by Σ coeffs[a]·a over a: c → c2 (postcomposition)."""
    A, B = representable(S, c, degree), representable(S, c2, degree)
    C = S.cat
    comps = {}
    for k in range(len(S)):
        src, tgt = C.hom_ids(k, c), C.hom_ids(k, c2)
        pos = {h: j for j, h in enumerate(tgt)}
        ent = {}
        for j, h in enumerate(src):
            for a, v in coeffs.items():
                i = pos[C.comp[(a, h)]]
                ent[(i, j)] = ent.get((i, j), 0) + v
        comps[k] = ChainMap(A.objects[k], B.objects[k],
                            {degree: Mat.from_dict({kk: v for kk, v in ent.items() if v}, len(tgt), len(src))},
                            check=False)
    return A, B, comps


def direct_sum_systems(systems) -> CoefficientSystem:
    systems = list(systems)
    S = systems[0].S
    objs, incs = [], []
    for k in range(len(S)):
        T, inc, _ = direct_sum([X.objects[k] for X in systems])
        objs.append(T)
        incs.append(inc)
    maps = {}
    for m in range(len(S.cat.morphisms)):
        s, t = S.cat.src(m), S.cat.tgt(m)
        degs = set(objs[s].dims) | set(objs[t].dims)
        comps = {n: Mat.block_diag([X.maps[m].at(n) for X in systems]) for n in degs}
        maps[m] = ChainMap(objs[t], objs[s], comps, check=False)
    return CoefficientSystem(S, objs, maps, check=False)


def mapping_cone_system(A: CoefficientSystem, B: CoefficientSystem, comps) -> CoefficientSystem:
    """Levelwise cone of a natural chain map A → B."""
    S = A.S
    objs = [ChainMap(A.objects[k], B.objects[k], comps[k].comps, check=False).cone() for k in range(len(S))]
    maps = {}
    for m in range(len(S.cat.morphisms)):
        s, t = S.cat.src(m), S.cat.tgt(m)
        fa, fb = A.maps[m], B.maps[m]
        d = {}
        for n in set(objs[s].dims) | set(objs[t].dims):
            d[n] = Mat.blocks({(0, 0): fa.at(n - 1), (1, 1): fb.at(n)},
                              [A.objects[s].dim(n - 1), B.objects[s].dim(n)],
                              [A.objects[t].dim(n - 1), B.objects[t].dim(n)])
        maps[m] = ChainMap(objs[t], objs[s], d, check=False)
    return CoefficientSystem(S, objs, maps, check=False)


def random_system(rng: random.Random, S: SliceCat, max_total=6, degrees=(0, 1)) -> CoefficientSystem:
    """Sums of shifted representables and cones of random maps between them."""
    for _ in range(200):
        parts = []
        for _ in range(rng.randint(1, 3)):
            kind = rng.random()
            c = rng.randrange(len(S))
            deg = rng.choice(degrees)
            if kind < 0.6:
                parts.append(representable(S, c, deg))
            else:
                c2 = rng.randrange(len(S))
                homs = S.cat.hom_ids(c, c2)
                if not homs:
                    parts.append(representable(S, c, deg))
                    continue
                coeffs = {a: Fraction(rng.randint(-2, 2)) for a in homs}
                A, B, comps = representable_map(S, c, c2, coeffs, deg)
                parts.append(mapping_cone_system(A, B, comps))
        X = direct_sum_systems(parts)
        if 0 < X.total_dim() <= max_total:
            return X
    raise HochError("could not sample a system under the size cap")


def slice_over_point(G) -> tuple:
    O = OrbitCat(G)
    return O, SliceCat(O, point(G))


# Σ^w -------------------------------------------------------------------------

def _punctured_top(cube: ParamCube, k) -> FinPoset:
    L = cube.fibre(k)
    return L.sub([x for x in L.labels if x != L.top])


def _down_punctured(cube: ParamCube, k, e) -> FinPoset:
    L = cube.fibre(k)
    return L.sub([x for x in L.labels if x != L.top and x <= e])


def _at_bottom(P: FinPoset, X: ChainComplex) -> ChainDiagram:
    return ChainDiagram(P, {P.bottom: X} if P.labels else {}, {}, check=False)


def _restrict_hocolim(cube, X, m, Ds, Dt, Hs, Ht):
    """Map of hocolims along the restriction of slice map m: s → t."""
    r = cube.res(m)
    f = X.maps[m]
    eta = {}
    for p in Dt.shape.labels:
        if p == Dt.shape.bottom:
            eta[p] = f
        else:
            eta[p] = zero_map(Dt.objects[p], Ds.objects[r(p)])
    return hocolim_induced(Dt, Ds, r, eta, Ht, Hs)


def suspension_w(X: CoefficientSystem, w: GMap, cube: ParamCube = None) -> CoefficientSystem:
    S = X.S
    cube = cube or build_cube(S.O, w, S)
    diagrams, objs = [], []
    for k in range(len(S)):
        D = _at_bottom(_punctured_top(cube, k), X.objects[k])
        diagrams.append(D)
        objs.append(hocolim_poset(D))
    maps = {}
    for m in range(len(S.cat.morphisms)):
        s, t = S.cat.src(m), S.cat.tgt(m)
        maps[m] = _restrict_hocolim(cube, X, m, diagrams[s], diagrams[t], objs[s], objs[t])
    return CoefficientSystem(S, objs, maps, check=False)


def sphere(S: SliceCat, w: GMap, cube=None) -> CoefficientSystem:
    return suspension_w(unit_system(S), w, cube)


@dataclass
class SphereDims:
    dims: dict          # level name -> integer
    orbit_counts: dict  # level name -> number of orbits of B ×_V W
    certified: bool | None   # None when the chain-level computation was skipped
    homology: dict = field(default_factory=dict)


def orbit_counts(S: SliceCat, w: GMap) -> dict:
    """Number of orbits of B ×_V W at every level, without building the cube."""
    from .orbital import pullback
    return {S.level_name(k): len(pullback(S.structure_map(k), w)[0].orbits) for k in range(len(S))}


CERT_CAP = 5


def sphere_dims(S: SliceCat, w: GMap, certify=True, cert_cap=CERT_CAP) -> SphereDims:
    """Dimension function of S^w.  With `certify`, Σ^w of the unit is computed and every level must have
    a single rank-one homology class in the predicted degree; skipped (certified=None) above `cert_cap` orbits."""
    counts = orbit_counts(S, w)
    dims = {name: n - 1 for name, n in counts.items()}
    hom = {}
    ok = None
    if certify and max(counts.values()) <= cert_cap:
        ok = True
        Sw = sphere(S, w, build_cube(S.O, w, S))
        for k in range(len(S)):
            h = Sw.objects[k].homology()
            hom[S.level_name(k)] = h
            if h != {dims[S.level_name(k)]: 1}:
                ok = False
    return SphereDims(dims, counts, ok, hom)


# comma categories over the total category of a cube --------------------------

class Comma:
    """Objects (c, e, g) with g: c → b in the slice and e in a chosen part of the c-fibre.

    A morphism (c, e, g) → (c', e', g') is a slice map f: c' → c with
    f^*e ≤ e' and g∘f = g'.
    """

    def __init__(self, cube: ParamCube, b, allowed):
        S = cube.S
        C = S.cat
        self.cube = cube
        objs = []
        for c in range(len(S)):
            for g in C.hom_ids(c, b):
                for e in cube.fibre(c).labels:
                    if allowed(c, e):
                        objs.append((c, e, g))
        self.objects = objs
        morph, lookup = [], {}
        for i, (c, e, g) in enumerate(objs):
            for j, (c2, e2, g2) in enumerate(objs):
                for f in C.hom_ids(c2, c):
                    if C.comp[(g, f)] == g2 and cube.res(f)(e) <= e2:
                        lookup[(i, j, f)] = len(morph)
                        morph.append((i, j, f))
        self.morphisms = morph
        comp = {}
        for h2, (j, k, f2) in enumerate(morph):
            for h1 in [h for h in range(len(morph)) if morph[h][1] == j]:
                i, _, f1 = morph[h1]
                comp[(h2, h1)] = lookup[(i, k, C.comp[(f1, f2)])]
        ids = [lookup[(i, i, C.identities[c])] for i, (c, _, _) in enumerate(objs)]
        self.cat = Cat(len(objs), [m[0] for m in morph], [m[1] for m in morph], comp, ids)


def loop_w_level(Y: CoefficientSystem, w: GMap, b, cube=None) -> ChainComplex:
    """Ω^wY at level b: holim over the comma category of λ_Y (Y at 𝟙, zero elsewhere)."""
    S = Y.S
    cube = cube or build_cube(S.O, w, S)
    E = Comma(cube, b, lambda c, e: e != cube.fibre(c).bottom)
    objs = [Y.objects[c] if e == cube.fibre(c).top else ChainComplex.zero() for c, e, _ in E.objects]
    maps = {}
    for h, (i, j, f) in enumerate(E.morphisms):
        if E.objects[i][1] == cube.fibre(E.objects[i][0]).top and E.objects[j][1] == cube.fibre(E.objects[j][0]).top:
            maps[h] = Y.maps[f]
        else:
            maps[h] = zero_map(objs[i], objs[j])
    return holim_ei(Functor(E.cat, objs, maps))[0]


@dataclass
class UnitReport:
    level: str
    source_homology: dict
    target_homology: dict
    qiso: bool


def suspension_loop_unit(X: CoefficientSystem, w: GMap, b, cube=None, check=False):
    """The unit X(b) → (Ω^wΣ^wX)(b), as a chain map into the comma-category holim.

    Σ^wX is kept as the whole parametrised diagram Z(c, y), the homotopy colimit
    over {p ≠ 𝟙 : p ≤ y} of X(c) placed at ∅; it is objectwise equivalent to the
    diagram that is Σ^wX at 𝟙 and zero elsewhere on the comma category.
    """
    S = X.S
    cube = cube or build_cube(S.O, w, S)
    E = Comma(cube, b, lambda c, e: e != cube.fibre(c).bottom)
    diag, hol = {}, {}

    def Z(c, e):
        if (c, e) not in diag:
            D = _at_bottom(_down_punctured(cube, c, e), X.objects[c])
            diag[(c, e)] = D
            hol[(c, e)] = hocolim_poset(D)
        return diag[(c, e)], hol[(c, e)]

    objs = [Z(c, e)[1] for c, e, _ in E.objects]
    maps = {}
    for h, (i, j, f) in enumerate(E.morphisms):
        (c, e, _), (c2, e2, _) = E.objects[i], E.objects[j]
        D1, H1 = Z(c, e)
        D2, H2 = Z(c2, e2)
        r = cube.res(f)
        eta = {p: (X.maps[f] if p == D1.shape.bottom else zero_map(D1.objects[p], D2.objects[r(p)]))
               for p in D1.shape.labels}
        maps[h] = hocolim_induced(D1, D2, r, eta, H1, H2)
    F = Functor(E.cat, objs, maps)
    if check and not F.check():
        raise HochError("comma diagram is not functorial")
    phi = {}
    for i, (c, e, g) in enumerate(E.objects):
        D, H = Z(c, e)
        pt = _at_bottom(D.shape.sub([D.shape.bottom]), X.objects[c])
        # the hocolim over a point is X(c) itself
        inc = hocolim_induced(pt, D, lambda p: p, {D.shape.bottom: identity_map(X.objects[c])}, X.objects[c], H)
        phi[i] = inc.compose(X.maps[g])
    Hh = holim_ei(F)
    u = holim_cone_map(F, X.objects[b], phi, Hh)
    return u, Hh[0]


def unit_report(X: CoefficientSystem, w: GMap, cube=None) -> list:
    S = X.S
    cube = cube or build_cube(S.O, w, S)
    out = []
    for b in range(len(S)):
        u, H = suspension_loop_unit(X, w, b, cube)
        out.append(UnitReport(S.level_name(b), X.objects[b].homology(), H.homology(), u.is_qiso()))
    return out


@dataclass
class ProbeResult:
    found: bool
    witness: CoefficientSystem | None
    failing_level: str | None
    report: list
    seed: int
    tried: int


def faithfulness_probe(S: SliceCat, w: GMap, seed=0, samples=40, max_total=6, require=False) -> ProbeResult:
    """Seeded search for X whose unit X → Ω^wΣ^wX is not a quasi-isomorphism at some level."""
    rng = random.Random(seed)
    cube = build_cube(S.O, w, S)
    last = []
    for n in range(samples):
        X = random_system(rng, S, max_total)
        rep = unit_report(X, w, cube)
        last = rep
        bad = [r for r in rep if not r.qiso]
        if bad:
            return ProbeResult(True, X, bad[0].level, rep, seed, n + 1)
    if require:
        raise ExhaustedNoWitness(samples)
    return ProbeResult(False, None, None, last, seed, samples)


# sphere calculus ---------------------------------------------------------------

def plus(w: GMap) -> GMap:
    """w_+ = w ⊔ id_V."""
    V = w.target
    U, (i1, i2) = disjoint_union(w.source, V)
    mapping = [None] * U.size
    for x in w.source.points:
        mapping[i1.map[x]] = w.map[x]
    for v in V.points:
        mapping[i2.map[v]] = v
    return GMap(U, V, mapping)


def coproduct_map(u: GMap, w: GMap) -> GMap:
    U, (i1, i2) = disjoint_union(u.source, w.source)
    mapping = [None] * U.size
    for x in u.source.points:
        mapping[i1.map[x]] = u.map[x]
    for x in w.source.points:
        mapping[i2.map[x]] = w.map[x]
    return GMap(U, w.target, mapping)


@dataclass
class SphereCalculusReport:
    levels: list
    rows: dict = field(default_factory=dict)   # level -> provenance
    identity1: bool = True
    identity2: bool = True
    identity3: bool = True
    chain_level: bool = True
    certified: int = 0

    @property
    def ok(self):
        return self.identity1 and self.identity2 and self.identity3 and self.chain_level


def sphere_calculus_check(S: SliceCat, u: GMap, w: GMap, chain_level=True, cert_cap=CERT_CAP) -> SphereCalculusReport:
    """dim S^{w+} = dim S^w + 1; dim S^{u⊔w} = dim S^{u+} + dim S^w; dim w_⊗S¹ = |W/K| = dim S^{w+}.

    The indexed smash of S¹ along w has one circle per orbit of B ×_V W at level B.
    """
    sw = sphere_dims(S, w, chain_level, cert_cap)
    swp = sphere_dims(S, plus(w), chain_level, cert_cap)
    sup = sphere_dims(S, plus(u), chain_level, cert_cap)
    suw = sphere_dims(S, coproduct_map(u, w), chain_level, cert_cap)
    rep = SphereCalculusReport([S.level_name(k) for k in range(len(S))])
    for name in rep.levels:
        smash = sw.orbit_counts[name]
        rep.rows[name] = {"S^w": sw.dims[name], "S^w+": swp.dims[name], "S^u+": sup.dims[name],
                          "S^(u⊔w)": suw.dims[name], "orbits(B×W)": sw.orbit_counts[name],
                          "orbits(B×U)": sup.orbit_counts[name] - 1, "w⊗S^1": smash}
        rep.identity1 &= swp.dims[name] == sw.dims[name] + 1
        rep.identity2 &= suw.dims[name] == sup.dims[name] + sw.dims[name]
        rep.identity3 &= smash == swp.dims[name]
    certs = [c.certified for c in (sw, swp, sup, suw)]
    rep.chain_level = all(c is not False for c in certs)
    rep.certified = sum(1 for c in certs if c)
    if chain_level and sw.certified is not None and swp.certified is not None:
        # (1) at chain level: Σ^{w+}(unit) has the homology of Σ^w(unit) shifted up by one
        for name in rep.levels:
            shifted = {n + 1: v for n, v in sw.homology[name].items()}
            rep.chain_level &= swp.homology[name] == shifted
    return rep


# indexed coproducts, products and the norm ------------------------------------

class _Restriction:
    """w^*: levels and morphisms of O_{/W} seen in O_{/V}."""

    def __init__(self, S: SliceCat, w: GMap):
        self.S = S
        self.w = w
        self.SW = SliceCat(S.O, w.source)
        SW = self.SW
        self.level = [S.level(i, w.compose(d)) for i, d in SW.levels]
        self.morph = [S.morphism(self.level[s], self.level[t], f) for s, t, f in SW.cat.morphisms]


def _norm_data(X: CoefficientSystem, w: GMap, b, R: _Restriction):
    S, SW = X.S, R.SW
    C, CW = S.cat, SW.cat
    # E1: (d, φ: b → w d), morphisms (d, φ) → (d', φ') for u: d' → d with u∘φ' = φ
    o1 = [(d, phi) for d in range(len(SW)) for phi in C.hom_ids(b, R.level[d])]
    m1, l1 = [], {}
    for i, (d, phi) in enumerate(o1):
        for j, (d2, phi2) in enumerate(o1):
            for u in CW.hom_ids(d2, d):
                if C.comp[(R.morph[u], phi2)] == phi:
                    l1[(i, j, u)] = len(m1)
                    m1.append((i, j, u))
    # E2: (d, ψ: w d → b), morphisms (d, ψ) → (d', ψ') for u: d' → d with ψ∘u = ψ'
    o2 = [(d, psi) for d in range(len(SW)) for psi in C.hom_ids(R.level[d], b)]
    m2, l2 = [], {}
    for i, (d, psi) in enumerate(o2):
        for j, (d2, psi2) in enumerate(o2):
            for u in CW.hom_ids(d2, d):
                if C.comp[(psi, R.morph[u])] == psi2:
                    l2[(i, j, u)] = len(m2)
                    m2.append((i, j, u))

    def mkcat(objs, morph, lookup):
        comp = {}
        for h2, (j, k, u2) in enumerate(morph):
            for h1, (i, j1, u1) in enumerate(morph):
                if j1 == j:
                    comp[(h2, h1)] = lookup[(i, k, CW.comp[(u1, u2)])]
        ids = [lookup[(i, i, CW.identities[d])] for i, (d, _) in enumerate(objs)]
        return Cat(len(objs), [m[0] for m in morph], [m[1] for m in morph], comp, ids)

    E1, E2 = mkcat(o1, m1, l1), mkcat(o2, m2, l2)
    F1 = Functor(E1, [X.objects[R.level[d]] for d, _ in o1], {h: X.maps[R.morph[u]] for h, (_, _, u) in enumerate(m1)})
    F2 = Functor(E2, [X.objects[R.level[d]] for d, _ in o2], {h: X.maps[R.morph[u]] for h, (_, _, u) in enumerate(m2)})
    return o1, F1, o2, F2


@dataclass
class NormLevel:
    level: str
    lower: ChainComplex
    upper: ChainComplex
    norm: ChainMap
    sections: int
    orbits: int

    @property
    def qiso(self):
        return self.norm.is_qiso()


def norm_map(X: CoefficientSystem, w: GMap) -> list:
    """Per level: w_!w^*X, w_*w^*X and the norm between them."""
    S = X.S
    R = _Restriction(S, w)
    cube = build_cube(S.O, w, S)
    out = []
    for b in range(len(S)):
        o1, F1, o2, F2 = _norm_data(X, w, b, R)
        Xb = X.objects[b]
        secs = sections(S, b, w)
        total, incs, _ = direct_sum([Xb] * len(secs))
        H1 = hocolim_ei(F1)
        H2 = holim_ei(F2)
        sec_index = {s.map: j for j, s in enumerate(secs)}
        cocone = {}
        for i, (d, phi) in enumerate(o1):
            delta = R.SW.structure_map(d)
            s = delta.compose(S.cat.morphisms[phi][2])
            cocone[i] = incs[sec_index[s.map]].compose(X.maps[phi])
        down = hocolim_cocone_map(F1, total, cocone, H1) if secs else zero_map(H1[0], total)
        cone = {}
        for i, (d, psi) in enumerate(o2):
            delta = R.SW.structure_map(d)
            psimap = S.cat.morphisms[psi][2]
            parts = []
            for j, s in enumerate(secs):
                if s.compose(psimap).map == delta.map:
                    parts.append(X.maps[psi].compose(_proj(total, Xb, j, len(secs))))
            cone[i] = parts[0] if parts else zero_map(total, F2.objects[i])
            for p in parts[1:]:
                cone[i] = cone[i] + p
        up = holim_cone_map(F2, total, cone, H2)
        out.append(NormLevel(S.level_name(b), H1[0], H2[0], up.compose(down), len(secs), cube.n_orbits(b)))
    return out


def _proj(total, Xb, j, n):
    comps = {}
    for deg in total.dims:
        k = Xb.dim(deg)
        comps[deg] = Mat.hstack([Mat.eye(k) if i == j else Mat.zeros(k, k) for i in range(n)], m=k)
    return ChainMap(total, Xb, comps, check=False)


def closed_form_homology(X: CoefficientSystem, w: GMap) -> dict:
    """Per level: homology of ⊕_sections X(b) and of ∏_orbits X(orbit), the cross-check oracles."""
    S = X.S
    cube = build_cube(S.O, w, S)
    out = {}
    for b in range(len(S)):
        hb = X.objects[b].homology()
        lower = {n: v * len(sections(S, b, w)) for n, v in hb.items()}
        upper = {}
        for lvl in _orbit_levels(cube, b):
            for n, v in X.objects[lvl[0]].homology().items():
                upper[n] = upper.get(n, 0) + v
        out[S.level_name(b)] = ({n: v for n, v in lower.items() if v}, upper)
    return out


def _orbit_levels(cube: ParamCube, k):
    """Per orbit of B ×_V W: (slice level of the orbit, iso O_i → orbit as a list of pullback point indices)."""
    key = ("orbit_levels", k)
    cache = cube.__dict__.setdefault("_hoch_cache", {})
    if key in cache:
        return cache[key]
    S = cube.S
    P, p1, _ = cube.pullbacks[k]
    b = S.structure_map(k)
    out = []
    for orb, _ in P.orbits:
        i, iso = orbit_object(S.O, P, orb)
        struct = b.compose(p1).compose(iso)
        out.append((S.level(i, struct), list(iso.map)))
    cache[key] = out
    return out


def _orbit_morphism(cube: ParamCube, m, o_src, o_tgt):
    """Slice map from the orbit o_src of level src(m) to the orbit o_tgt of level tgt(m), induced by m."""
    S = cube.S
    s, t, f = S.cat.morphisms[m]
    Ps, _, _ = cube.pullbacks[s]
    Pt, _, _ = cube.pullbacks[t]
    ls, isos = _orbit_levels(cube, s)[o_src]
    lt, isot = _orbit_levels(cube, t)[o_tgt]
    tidx = {lab: j for j, lab in enumerate(Pt.labels)}
    inv = {p: j for j, p in enumerate(isot)}
    mapping = []
    for j in range(len(isos)):
        x, y = Ps.labels[isos[j]]
        mapping.append(inv[tidx[(f(x), y)]])
    Os, Ot = S.source_set(ls), S.source_set(lt)
    return S.morphism(ls, lt, GMap(Os, Ot, mapping))


def _orbit_image(cube: ParamCube, m):
    """om[o] = orbit of P(tgt) containing the image of orbit o of P(src)."""
    S = cube.S
    s, t, f = S.cat.morphisms[m]
    Ps, Pt = cube.pullbacks[s][0], cube.pullbacks[t][0]
    tidx = {lab: j for j, lab in enumerate(Pt.labels)}
    oi = Pt.orbit_index()
    out = []
    for orb, _ in Ps.orbits:
        x, y = Ps.labels[orb[0]]
        out.append(oi[tidx[(f(x), y)]])
    return out


# α and β cubes -------------------------------------------------------------------

def _product(X: CoefficientSystem, cube, c, T):
    """∏ over orbits of C×W outside T of X(orbit), with the factor order."""
    levels = _orbit_levels(cube, c)
    factors = [o for o in range(len(levels)) if o not in T]
    return direct_sum([X.objects[levels[o][0]] for o in factors])[0], factors


def _beta_map(X, cube, m, T, T2, src_prod, tgt_prod):
    """β(T)(t) → β(T2)(s) along m: s → t, requiring m^*T ⊆ T2."""
    S = cube.S
    s, t, _ = S.cat.morphisms[m]
    (Pt, ft), (Ps, fs) = tgt_prod, src_prod
    om = _orbit_image(cube, m)
    lv_t, lv_s = _orbit_levels(cube, t), _orbit_levels(cube, s)
    comps = {}
    for n in set(Pt.dims) | set(Ps.dims):
        grid = {}
        for a, o2 in enumerate(fs):
            o = om[o2]
            bpos = ft.index(o)
            mm = _orbit_morphism(cube, m, o2, o)
            grid[(a, bpos)] = X.maps[mm].at(n)
        comps[n] = Mat.blocks(grid, [X.objects[lv_s[o][0]].dim(n) for o in fs],
                              [X.objects[lv_t[o][0]].dim(n) for o in ft])
    return ChainMap(Pt, Ps, comps, check=False)


def alpha_fibre(X: CoefficientSystem, w: GMap, b, cube) -> tuple:
    """α(−)(b) over the b-fibre: T ↦ ⊕ over sections whose graph orbit is not in T of X(b)."""
    S = X.S
    L = cube.fibre(b)
    secs = sections(S, b, w)
    graphs = [graph_orbit(cube, b, s.map) for s in secs]
    Xb = X.objects[b]
    objs, keep = {}, {}
    for T in L.labels:
        keep[T] = [j for j, g in enumerate(graphs) if g not in T]
        objs[T] = direct_sum([Xb] * len(keep[T]))[0]
    edges = {}
    for T, T2 in L.covers:
        comps = {}
        for n in Xb.dims:
            k = Xb.dim(n)
            grid = {(a, keep[T].index(j)): Mat.eye(k) for a, j in enumerate(keep[T2])}
            comps[n] = Mat.blocks(grid, [k] * len(keep[T2]), [k] * len(keep[T]))
        edges[(T, T2)] = ChainMap(objs[T], objs[T2], comps, check=False)
    return ChainDiagram(L, objs, edges), graphs


def beta_fibre(X: CoefficientSystem, w: GMap, b, cube) -> ChainDiagram:
    L = cube.fibre(b)
    prods = {T: _product(X, cube, b, T) for T in L.labels}
    idm = X.S.cat.identities[b]
    edges = {(T, T2): _beta_map(X, cube, idm, T, T2, prods[T2], prods[T]) for T, T2 in L.covers}
    return ChainDiagram(L, {T: prods[T][0] for T in L.labels}, edges)


def _hocolim_into(D: ChainDiagram, sub, top) -> ChainMap:
    """hocolim over `sub` → D(top), for top above every element of sub."""
    P = D.shape.sub(sub)
    Dsub = ChainDiagram(P, {p: D.objects[p] for p in P.labels},
                        {(a, c): D.map(a, c) for a, c in P.covers}, check=False)
    H = hocolim_poset(Dsub)
    Q = D.shape.sub(list(sub) + [top])
    Dq = ChainDiagram(Q, {p: D.objects[p] for p in Q.labels}, {(a, c): D.map(a, c) for a, c in Q.covers}, check=False)
    Hq = hocolim_poset(Dq)
    inc = hocolim_induced(Dsub, Dq, lambda p: p, {p: identity_map(D.objects[p]) for p in P.labels}, H, Hq)
    from .chains import hocolim_to_colim_top
    return hocolim_to_colim_top(Dq, top).compose(inc)


@dataclass
class CubeCheck:
    name: str
    checked: int = 0
    failures: list = field(default_factory=list)

    @property
    def ok(self):
        return not self.failures


def alpha_singleton_cocartesian(X: CoefficientSystem, w: GMap, cube=None) -> CubeCheck:
    """Fibrewise: for each T, hocolim over {∅} ∪ {graph singletons ⊆ T} → α(T) is a quasi-isomorphism."""
    S = X.S
    cube = cube or build_cube(S.O, w, S)
    rep = CubeCheck("alpha singleton cocartesian")
    for b in range(len(S)):
        D, graphs = alpha_fibre(X, w, b, cube)
        L = cube.fibre(b)
        sing = [L.bottom] + [frozenset([g]) for g in graphs]
        for T in L.labels:
            if T in sing:
                continue
            sub = [q for q in sing if q <= T]
            rep.checked += 1
            if not _hocolim_into(D, sub, T).is_qiso():
                rep.failures.append((S.level_name(b), sorted(T)))
    return rep


def _full_subcategory(E: Comma, keep):
    idx = {i: n for n, i in enumerate(keep)}
    morph, mid = [], {}
    for h, (i, j, f) in enumerate(E.morphisms):
        if i in idx and j in idx:
            mid[h] = len(morph)
            morph.append((idx[i], idx[j], f))
    comp = {(mid[h2], mid[h1]): mid[h] for (h2, h1), h in E.cat.comp.items() if h1 in mid and h2 in mid}
    ids = [mid[E.cat.identities[i]] for i in keep]
    return Cat(len(keep), [m[0] for m in morph], [m[1] for m in morph], comp, ids), morph


def beta_singleton_cartesian(X: CoefficientSystem, w: GMap, cube=None) -> CubeCheck:
    """For each level b and T: β(T)(b) → holim over the comma category of
    {(c, T', g) : T' = 𝟙 or the complement of a graph singleton, g^*T ⊆ T'}."""
    S = X.S
    cube = cube or build_cube(S.O, w, S)
    rep = CubeCheck("beta singleton cartesian")

    def cosing(c):
        L = cube.fibre(c)
        out = {L.top}
        for s in sections(S, c, w):
            out.add(L.top - {graph_orbit(cube, c, s.map)})
        return out

    cos = {c: cosing(c) for c in range(len(S))}
    prods = {}

    def prod(c, T):
        if (c, T) not in prods:
            prods[(c, T)] = _product(X, cube, c, T)
        return prods[(c, T)]

    for b in range(len(S)):
        E = Comma(cube, b, lambda c, e: e in cos[c])
        for T in cube.fibre(b).labels:
            if T in cos[b]:
                continue
            keep = [i for i, (c, e, g) in enumerate(E.objects) if cube.res(g)(T) <= e]
            Ec, morph = _full_subcategory(E, keep)
            objs = [prod(E.objects[i][0], E.objects[i][1])[0] for i in keep]
            maps = {}
            for h, (a, a2, f) in enumerate(morph):
                (c1, e1, _), (c2, e2, _) = E.objects[keep[a]], E.objects[keep[a2]]
                maps[h] = _beta_map(X, cube, f, e1, e2, prod(c2, e2), prod(c1, e1))
            F = Functor(Ec, objs, maps)
            src = prod(b, T)
            phi = {}
            for n, i in enumerate(keep):
                c, e, g = E.objects[i]
                phi[n] = _beta_map(X, cube, g, T, e, prod(c, e), src)
            u = holim_cone_map(F, src[0], phi)
            rep.checked += 1
            if not u.is_qiso():
                rep.failures.append((S.level_name(b), sorted(T)))
    return rep


def norm_cube_check(X: CoefficientSystem, w: GMap, cube=None) -> dict:
    """ℵ: α → β at every level and vertex; returns {(level, vertex): is_qiso}."""
    S = X.S
    cube = cube or build_cube(S.O, w, S)
    out = {}
    for b in range(len(S)):
        D, graphs = alpha_fibre(X, w, b, cube)
        Bd = beta_fibre(X, w, b, cube)
        levels = _orbit_levels(cube, b)
        P, p1, _ = cube.pullbacks[b]
        Xb = X.objects[b]
        for T in cube.fibre(b).labels:
            A, Bt = D.objects[T], Bd.objects[T]
            ka = [j for j, g in enumerate(graphs) if g not in T]
            prodT, factors = _product(X, cube, b, T)
            comps = {}
            for n in set(A.dims) | set(Bt.dims):
                grid = {}
                for a, j in enumerate(ka):
                    o = graphs[j]
                    lvl, iso = levels[o]
                    gm = GMap(S.source_set(lvl), S.source_set(b), [P.labels[iso[q]][0] for q in range(len(iso))])
                    mm = S.morphism(lvl, b, gm)
                    grid[(factors.index(o), a)] = X.maps[mm].at(n)
                comps[n] = Mat.blocks(grid, [X.objects[levels[o][0]].dim(n) for o in factors], [Xb.dim(n)] * len(ka))
            f = ChainMap(A, Bt, comps, check=False)
            out[(S.level_name(b), tuple(sorted(T)))] = f.is_qiso()
    return out


# ordinary cubes in a stable setting -----------------------------------------------

@dataclass
class StableCubeReport:
    n: int
    cartesian: bool
    cocartesian: bool
    strongly_cocartesian: bool

    @property
    def consistent(self):
        """Cartesian and cocartesian agree, and strong cocartesianness implies both."""
        implied = self.n < 2 or not self.strongly_cocartesian or self.cartesian
        return self.cartesian == self.cocartesian and implied


def is_cartesian_cube(D: ChainDiagram) -> bool:
    from .chains import holim_from_bottom
    L = D.shape
    sub = [x for x in L.labels if x != L.bottom]
    f = holim_from_bottom(D, L.bottom)
    # holim over the whole cube is D(∅); compare with the punctured one
    P = L.sub(sub)
    Dp = ChainDiagram(P, {p: D.objects[p] for p in sub}, {(a, c): D.map(a, c) for a, c in P.covers}, check=False)
    Hp = holim_poset(Dp)
    from .chains import holim_induced
    H = holim_poset(D)
    res = holim_induced(D, Dp, lambda p: p, {p: identity_map(D.objects[p]) for p in sub}, H, Hp)
    return res.compose(f).is_qiso()


def is_cocartesian_cube(D: ChainDiagram) -> bool:
    L = D.shape
    return _hocolim_into(D, [x for x in L.labels if x != L.top], L.top).is_qiso()


def is_strongly_cocartesian_cube(D: ChainDiagram) -> bool:
    L = D.shape
    sing = [L.bottom] + list(L.atoms)
    for T in L.labels:
        if T in sing:
            continue
        if not _hocolim_into(D, [q for q in sing if L.le(q, T)], T).is_qiso():
            return False
    return True


def stable_cube_check(D: ChainDiagram) -> StableCubeReport:
    n = len(D.shape.atoms)
    if n > 4:
        raise HochError("cube dimension above 4")
    return StableCubeReport(n, is_cartesian_cube(D), is_cocartesian_cube(D), is_strongly_cocartesian_cube(D))


def free_cube(rng, n, max_total=4) -> ChainDiagram:
    """S ↦ A ⊕ ⊕_{i∈S} B_i with inclusions: strongly cocartesian, hence cartesian."""
    from .chains import random_complex
    L = powerset_lattice(range(n))
    parts = [random_complex(rng, max_total, -1, 1) for _ in range(n + 1)]   # A, B_0, ..., B_{n-1}

    def idx(T):
        return [0] + [i + 1 for i in sorted(T)]

    objs = {T: direct_sum([parts[k] for k in idx(T)])[0] for T in L.labels}
    edges = {}
    for T, T2 in L.covers:
        src, tgt = idx(T), idx(T2)
        comps = {}
        for deg in set(objs[T].dims) | set(objs[T2].dims):
            grid = {(tgt.index(k), a): Mat.eye(parts[k].dim(deg)) for a, k in enumerate(src)}
            comps[deg] = Mat.blocks(grid, [parts[k].dim(deg) for k in tgt], [parts[k].dim(deg) for k in src])
        edges[(T, T2)] = ChainMap(objs[T], objs[T2], comps, check=False)
    return ChainDiagram(L, objs, edges)


def from_vector_diagram(D, degree=0) -> ChainDiagram:
    """A diagram of vector spaces as a diagram of complexes concentrated in one degree."""
    objs = {x: ChainComplex.concentrated(D.dims[x], degree) for x in D.shape.labels}
    edges = {(a, b): ChainMap(objs[a], objs[b], {degree: M}, check=False) for (a, b), M in D.edges.items()}
    return ChainDiagram(D.shape, objs, edges, check=False)


def constant_cube(n, X: ChainComplex) -> ChainDiagram:
    L = powerset_lattice(range(n))
    return ChainDiagram(L, {T: X for T in L.labels}, {c: identity_map(X) for c in L.covers})


def gluing_check(F: ChainDiagram, G: ChainDiagram, phi: dict) -> bool | None:
    """For cartesian F, G and natural φ: F → G that is a quasi-isomorphism away from ∅,
    φ_∅ is a quasi-isomorphism too.  Returns None when the hypotheses fail."""
    L = F.shape
    if not (is_cartesian_cube(F) and is_cartesian_cube(G)):
        return None
    if not all(phi[T].is_qiso() for T in L.labels if T != L.bottom):
        return None
    return phi[L.bottom].is_qiso()


def _sum_cubes(F: ChainDiagram, K: ChainDiagram):
    L = F.shape
    objs, incs = {}, {}
    for T in L.labels:
        objs[T], inc, _ = direct_sum([F.objects[T], K.objects[T]])
        incs[T] = inc[0]
    edges = {}
    for a, b in L.covers:
        degs = set(objs[a].dims) | set(objs[b].dims)
        edges[(a, b)] = ChainMap(objs[a], objs[b], {n: Mat.block_diag([F.edges[(a, b)].at(n), K.edges[(a, b)].at(n)])
                                                    for n in degs}, check=False)
    return ChainDiagram(L, objs, edges, check=False), incs


@dataclass
class GluingTrial:
    hypotheses: bool
    conclusion: bool | None
    control_hypotheses: bool
    control_conclusion: bool


def gluing_trial(rng, n) -> GluingTrial:
    """F a free cube, G = F ⊕ (constant acyclic cube), φ the inclusion.

    The control replaces G(∅) by G(∅) ⊕ X with X not acyclic and zero maps
    out of it; G stops being cartesian and φ_∅ stops being a quasi-isomorphism.
    """
    from .chains import random_complex
    F = free_cube(rng, n)
    A = random_complex(rng, 3, -1, 1)
    acyc = identity_map(A).cone()
    K = constant_cube(n, acyc)
    G, phi = _sum_cubes(F, K)
    res = gluing_check(F, G, phi)
    X = ChainComplex.concentrated(1, 0)
    L = F.shape
    bot = L.bottom
    Z = ChainDiagram(L, {bot: X}, {}, check=False)
    G2, inc2 = _sum_cubes(G, Z)
    phi2 = {T: inc2[T].compose(phi[T]) for T in L.labels}
    res2 = gluing_check(F, G2, phi2)
    return GluingTrial(res is not None, res, res2 is not None, phi2[bot].is_qiso())
