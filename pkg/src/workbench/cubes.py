"""Parametrised posets over slices of an orbit category, and the cubes w_*Δ¹.

A level of the slice over V is a pair (i, b) with i an orbit index and
b: O_i → V an equivariant map.  A parametrised poset assigns a finite
poset to each level and a monotone restriction f^*: P(b) → P(b') to each
slice morphism f: b' → b.

Cube fibres are powersets of orbit indices of the pullback B ×_V W, with
orbits ordered as in `GSet.orbits`.
"""

from __future__ import annotations

from functools import cached_property
from itertools import product

from .lattice import (FinLattice, FinPoset, LatticeError, MonotoneMap, is_complementable,
                      powerset_lattice, MAX_LATTICE_SIZE, decomposition_triple, smashing_subposet)
from .orbital import (FinCategory, GMap, GSet, OrbitCat, GroupError, equivariant_maps,
                      pullback, sub_gset)

BOT = "⊥"


class CubeError(ValueError):
    pass


class NotAPartition(CubeError):
    pass


class SliceCat:
    """The comma category O_{/V} for an arbitrary finite G-set V."""

    def __init__(self, O: OrbitCat, V: GSet):
        self.O = O
        self.V = V
        levels = []
        for i, X in enumerate(O.objects):
            for b in equivariant_maps(X, V):
                levels.append((i, b))
        self.levels = levels
        self._lookup = {(i, b.map): k for k, (i, b) in enumerate(levels)}
        morphisms = []
        mlookup = {}
        for s, (i2, b2) in enumerate(levels):
            for t, (i1, b1) in enumerate(levels):
                for f in O.hom(i2, i1):
                    if b1.compose(f).map == b2.map:
                        mlookup[(s, t, f.map)] = len(morphisms)
                        morphisms.append((s, t, f))
        self._mlookup = mlookup
        ids = [mlookup[(k, k, tuple(range(O.objects[i].size)))] for k, (i, _) in enumerate(levels)]

        def compose(g, f):
            s, _, fm = morphisms[f]
            _, t, gm = morphisms[g]
            return mlookup[(s, t, gm.compose(fm).map)]

        self.cat = FinCategory(levels, morphisms, compose, ids)

    def level(self, i, b: GMap) -> int:
        return self._lookup[(i, b.map)]

    def morphism(self, s, t, f: GMap) -> int:
        return self._mlookup[(s, t, f.map)]

    def source_set(self, k) -> GSet:
        return self.O.objects[self.levels[k][0]]

    def structure_map(self, k) -> GMap:
        return self.levels[k][1]

    @cached_property
    def terminal(self):
        """A level whose structure map is an iso, if V is an orbit."""
        for k, (_, b) in enumerate(self.levels):
            if b.is_iso():
                return k
        return None

    def maps_between(self, s, t):
        """Morphism ids s → t."""
        return self.cat.hom_ids(s, t)

    def unique_map_to(self, s, t):
        ids = self.maps_between(s, t)
        return ids[0] if ids else None

    def level_name(self, k):
        i, b = self.levels[k]
        return f"{self.O.name(i)}→{list(b.map)}"

    def __len__(self):
        return len(self.levels)


def orbit_object(O: OrbitCat, X: GSet, orbit_points):
    """(i, iso O_i → the orbit) with basepoint the smallest point fixed by the representative subgroup."""
    pts = list(orbit_points)
    H = X.stabilizer(pts[0])
    G = O.group
    for i, K in enumerate(O.subgroups):
        if len(K) == len(H) and any(G.conjugate(g, H) == K for g in G.elements):
            u = min(p for p in pts if all(X.act[k][p] == p for k in K))
            base = O.objects[i]
            # G/K point j is the coset containing g; send it to g·u
            mapping = []
            for j in base.points:
                g = next(g for g in G.elements if base.act[g][0] == j)
                mapping.append(X.act[g][u])
            return i, GMap(base, X, mapping, check=False)
    raise GroupError("orbit type not found")


class ParamPoset:
    def __init__(self, S: SliceCat, fibres, restrict, name=""):
        """fibres: level -> FinPoset; restrict: morphism id -> MonotoneMap P(tgt) → P(src)."""
        self.S = S
        self.fibres = dict(fibres)
        self.restrict = dict(restrict)
        self.name = name

    def fibre(self, k):
        return self.fibres[k]

    def res(self, m):
        return self.restrict[m]

    def check_functorial(self) -> bool:
        C = self.S.cat
        for k, idm in enumerate(C.identities):
            r = self.restrict[idm]
            if any(r(x) != x for x in self.fibres[k].labels):
                return False
        for (g, f), gf in C.comp.items():
            # (g∘f)^* = f^* ∘ g^*
            rf, rg, rgf = self.restrict[f], self.restrict[g], self.restrict[gf]
            if any(rf(rg(x)) != rgf(x) for x in self.fibres[C.tgt(g)].labels):
                return False
        return True

    def is_pointed_shape(self) -> bool:
        for m, r in self.restrict.items():
            P, Q = r.source, r.target
            if P.bottom is None or P.top is None or r(P.bottom) != Q.bottom or r(P.top) != Q.top:
                return False
        return True

    def sizes(self):
        return {k: len(P) for k, P in self.fibres.items()}

    def to_json(self):
        from .lattice import lattice_to_json, label_to_json
        return {"base": {"group": self.S.O.group.to_json(), "V": self.S.V.to_json(),
                         "levels": [self.S.level_name(k) for k in range(len(self.S))]},
                "fibres": {str(k): lattice_to_json(P) for k, P in sorted(self.fibres.items())},
                "restrictions": {str(m): [[label_to_json(x), label_to_json(r(x))] for x in r.source.labels]
                                 for m, r in sorted(self.restrict.items())}}


class ParamMonotoneMap:
    def __init__(self, source: ParamPoset, target: ParamPoset, maps, check=True):
        self.source = source
        self.target = target
        self.maps = dict(maps)
        if check and not self.is_natural():
            raise CubeError("naturality square fails")

    def __call__(self, k, x):
        return self.maps[k](x)

    def naturality_witness(self):
        C = self.source.S.cat
        for m in range(len(C.morphisms)):
            s, t = C.src(m), C.tgt(m)
            rs, rt = self.source.res(m), self.target.res(m)
            for x in self.source.fibre(t).labels:
                if self.maps[s](rs(x)) != rt(self.maps[t](x)):
                    return (m, x)
        return None

    def is_natural(self) -> bool:
        return self.naturality_witness() is None

    def is_fully_faithful(self) -> bool:
        return all(f.is_injective() and f.is_full() for f in self.maps.values())

    def is_iso(self) -> bool:
        return all(f.is_injective() and f.is_full() and len(f.source) == len(f.target)
                   for f in self.maps.values())


# cubes --------------------------------------------------------------------

class ParamCube(ParamPoset):
    def __init__(self, O: OrbitCat, w: GMap, S: SliceCat | None = None):
        if S is None:
            S = SliceCat(O, w.target)
        self.w = w
        self.pullbacks = {}
        fibres = {}
        for k in range(len(S)):
            b = S.structure_map(k)
            P, p1, p2 = pullback(b, w)
            n = len(P.orbits)
            if 2 ** n > MAX_LATTICE_SIZE:
                raise CubeError(f"fibre of size 2^{n} exceeds cap")
            self.pullbacks[k] = (P, p1, p2)
            fibres[k] = powerset_lattice(range(n))
        restrict = {}
        C = S.cat
        for m, (s, t, f) in enumerate(C.morphisms):
            Ps = self.pullbacks[s][0]
            Pt = self.pullbacks[t][0]
            tidx = {lab: j for j, lab in enumerate(Pt.labels)}
            oi_t = Pt.orbit_index()
            # orbit o of P(s) maps into orbit om[o] of P(t)
            om = []
            for orb, _ in Ps.orbits:
                x, y = Ps.labels[orb[0]]
                om.append(oi_t[tidx[(f(x), y)]])
            restrict[m] = MonotoneMap(fibres[t], fibres[s],
                                      lambda T, om=om: frozenset(o for o, img in enumerate(om) if img in T),
                                      check=False)
        super().__init__(S, fibres, restrict, name=f"cube{list(w.map)}")

    def n_orbits(self, k):
        return len(self.pullbacks[k][0].orbits)


def build_cube(O: OrbitCat, w: GMap, S=None) -> ParamCube:
    return ParamCube(O, w, S)


def puncture(P: ParamPoset, which="top") -> ParamPoset:
    fibres = {}
    for k, L in P.fibres.items():
        drop = L.top if which == "top" else L.bottom
        if drop is None:
            raise CubeError(f"fibre {k} has no global {which}")
        fibres[k] = L.sub([x for x in L.labels if x != drop])
    restrict = {}
    for m, r in P.restrict.items():
        src, tgt = P.S.cat.tgt(m), P.S.cat.src(m)
        restrict[m] = MonotoneMap(fibres[src], fibres[tgt], {x: r(x) for x in fibres[src].labels})
    return ParamPoset(P.S, fibres, restrict, name=f"{P.name}\\{which}")


def inclusion(sub: ParamPoset, P: ParamPoset) -> ParamMonotoneMap:
    return ParamMonotoneMap(sub, P, {k: MonotoneMap(F, P.fibre(k), {x: x for x in F.labels})
                                     for k, F in sub.fibres.items()})


def sections(S: SliceCat, k, w: GMap):
    """Maps s: B → W with w∘s = b, for the level k = (B, b)."""
    B = S.source_set(k)
    b = S.structure_map(k)
    return [s for s in equivariant_maps(B, w.source) if w.compose(s).map == b.map]


def cone_poset(points) -> FinPoset:
    return FinPoset([BOT] + list(points), lambda x, y: x == y or x == BOT)


def singleton_subposet(O: OrbitCat, w: GMap, S=None) -> ParamPoset:
    if S is None:
        S = SliceCat(O, w.target)
    fibres = {k: cone_poset([s.map for s in sections(S, k, w)]) for k in range(len(S))}
    restrict = {}
    for m, (s, t, f) in enumerate(S.cat.morphisms):
        restrict[m] = MonotoneMap(fibres[t], fibres[s],
                                  lambda x, f=f: BOT if x == BOT else tuple(x[j] for j in f.map),
                                  check=False)
    return ParamPoset(S, fibres, restrict, name=f"sing{list(w.map)}")


def singleton_inclusion(O: OrbitCat, w: GMap, cube: ParamCube | None = None) -> ParamMonotoneMap:
    cube = cube or build_cube(O, w)
    sing = singleton_subposet(O, w, cube.S)
    maps = {}
    for k in range(len(cube.S)):
        Pk = cube.pullbacks[k][0]
        idx = {lab: j for j, lab in enumerate(Pk.labels)}
        oi = Pk.orbit_index()

        def phi(x, idx=idx, oi=oi):
            if x == BOT:
                return frozenset()
            return frozenset([oi[idx[(0, x[0])]]])

        maps[k] = MonotoneMap(sing.fibre(k), cube.fibre(k), phi)
    out = ParamMonotoneMap(sing, cube, maps)
    if not out.is_fully_faithful():
        raise CubeError("singleton inclusion is not fully faithful")
    return out


def graph_orbit(cube: ParamCube, k, s) -> int:
    """Orbit index of the graph of a section at level k."""
    Pk = cube.pullbacks[k][0]
    return Pk.orbit_index()[Pk.labels.index((0, s[0]))]


# points, faces, basechange ------------------------------------------------

def global_points(P: ParamPoset):
    t = P.S.terminal
    if t is None:
        raise CubeError("base has no terminal level")
    return [(t, x) for x in P.fibre(t).labels]


def enumerate_points(P: ParamPoset):
    return [(k, x) for k in sorted(P.fibres) for x in P.fibre(k).labels]


def level_restriction_from_terminal(P: ParamPoset, k):
    """The restriction map P(terminal) → P(k) along the unique slice map."""
    t = P.S.terminal
    m = P.S.unique_map_to(k, t)
    return P.res(m)


def decomposition_from_orbit_partition(O: OrbitCat, cube: ParamCube, A, D, Z):
    """Triples per level plus the identification of each a-face with the cube of w restricted to A."""
    A, D, Z = frozenset(A), frozenset(D), frozenset(Z)
    t = cube.S.terminal
    full = cube.fibre(t).top
    if (A & D) or (A & Z) or (D & Z) or (A | D | Z) != full:
        raise NotAPartition(f"{sorted(A)}, {sorted(D)}, {sorted(Z)} do not partition {sorted(full)}")
    triples = {}
    for k in range(len(cube.S)):
        r = level_restriction_from_terminal(cube, k)
        triples[k] = decomposition_triple(cube.fibre(k), r(A), r(D))
        if triples[k].z != r(Z):
            raise LatticeError("complement of a∨d matches restricted Z", k)
    # the terminal pullback V ×_V W is W up to the first coordinate
    Pt = cube.pullbacks[t][0]
    WA_pts = sorted({Pt.labels[p][1] for o in A for p in Pt.orbits[o][0]})
    W = cube.w.source
    WA, inc = sub_gset(W, WA_pts)
    wA = cube.w.compose(inc)
    face = build_cube(O, wA, cube.S) if WA.size else None
    ident = {}
    for k in range(len(cube.S)):
        La = smashing_subposet(cube.fibre(k), triples[k].a)
        Pk = cube.pullbacks[k][0]
        oi = Pk.orbit_index()
        idx = {lab: j for j, lab in enumerate(Pk.labels)}
        if face is None:
            ident[k] = {frozenset(): frozenset()}
            continue
        Fk = face.pullbacks[k][0]
        # orbit of B ×_V W_A ↦ orbit of B ×_V W containing its image
        om = [oi[idx[(Fk.labels[orb[0]][0], inc(Fk.labels[orb[0]][1]))]] for orb, _ in Fk.orbits]
        bij = {S_: frozenset(om[o] for o in S_) for S_ in face.fibre(k).labels}
        if sorted(bij.values(), key=lambda s: (len(s), sorted(s))) != sorted(La.labels, key=lambda s: (len(s), sorted(s))):
            raise CubeError(f"face at level {k} does not match the restricted cube")
        ident[k] = bij
    return triples, face, ident


def basechange(P: ParamPoset, b: GMap, S_new: SliceCat | None = None) -> ParamPoset:
    """Restriction of P along b: B → V, living over the slice at B."""
    S = P.S
    O = S.O
    Sb = S_new or SliceCat(O, b.source)
    lv = {k: S.level(i, b.compose(c)) for k, (i, c) in enumerate(Sb.levels)}
    fibres = {k: P.fibre(lv[k]) for k in range(len(Sb))}
    restrict = {}
    for m, (s, t, f) in enumerate(Sb.cat.morphisms):
        restrict[m] = P.res(S.morphism(lv[s], lv[t], f))
    return ParamPoset(Sb, fibres, restrict, name=f"{P.name}|b")


def pulled_back_map(w: GMap, b: GMap) -> GMap:
    """w̄: B ×_V W → B."""
    _, p1, _ = pullback(b, w)
    return p1


def cube_basechange_iso(O: OrbitCat, w: GMap, b: GMap):
    """Explicit fibre bijections b^*(w_*Δ¹) ≅ (w̄)_*Δ¹, checked to commute with restrictions."""
    cube = build_cube(O, w)
    Sb = SliceCat(O, b.source)
    bc = basechange(cube, b, Sb)
    wbar = pulled_back_map(w, b)
    other = build_cube(O, wbar, Sb)
    maps = {}
    for k, (i, c) in enumerate(Sb.levels):
        # C ×_B (B ×_V W) → C ×_V W, (u, (x, y)) ↦ (u, y)
        P2 = other.pullbacks[k][0]
        Q = cube.pullbacks[cube.S.level(i, b.compose(c))][0]
        qidx = {lab: j for j, lab in enumerate(Q.labels)}
        qo = Q.orbit_index()
        BW = wbar.source
        om = []
        for orb, _ in P2.orbits:
            u, xy = P2.labels[orb[0]]
            om.append(qo[qidx[(u, BW.labels[xy][1])]])
        if sorted(om) != list(range(len(Q.orbits))):
            raise CubeError("basechange orbit map is not a bijection")
        maps[k] = MonotoneMap(other.fibre(k), bc.fibre(k), lambda T, om=om: frozenset(om[o] for o in T))
    iso = ParamMonotoneMap(other, bc, maps)
    assert iso.is_iso()
    return iso


def singleton_basechange_check(O: OrbitCat, w: GMap, b: GMap) -> bool:
    """b^*φ_w agrees with φ_{w̄} under the cube iso and the section bijection s ↦ (id, s)."""
    phi = singleton_inclusion(O, w)
    Sb = SliceCat(O, b.source)
    wbar = pulled_back_map(w, b)
    phib = singleton_inclusion(O, wbar, build_cube(O, wbar, Sb))
    iso = cube_basechange_iso(O, w, b)
    BW = wbar.source
    for k, (i, c) in enumerate(Sb.levels):
        kv = phi.source.S.level(i, b.compose(c))
        src_b = phib.source.fibre(k)
        src = phi.source.fibre(kv)
        # section t of w̄ over c corresponds to the section s = pr2∘t of w over b∘c
        corr = {}
        for t in src_b.labels:
            corr[t] = BOT if t == BOT else tuple(BW.labels[j][1] for j in t)
        if sorted(corr.values(), key=str) != sorted(src.labels, key=str):
            return False
        for t in src_b.labels:
            if iso.maps[k](phib.maps[k](t)) != phi.maps[kv](corr[t]):
                return False
    return True


# pushforward ----------------------------------------------------------------

def pushforward(O: OrbitCat, a: GMap, P: ParamPoset, SA: SliceCat | None = None) -> ParamPoset:
    """a_*P: at c: C → A, the product over orbits U of C ×_A V of P at U → V."""
    SV = P.S
    SA = SA or SliceCat(O, a.target)
    data = {}
    fibres = {}
    for k in range(len(SA)):
        c = SA.structure_map(k)
        Pb, p1, p2 = pullback(c, a)
        comps = []
        for orb, _ in Pb.orbits:
            i, iso = orbit_object(O, Pb, orb)
            lvl = SV.level(i, p2.compose(iso))
            comps.append((lvl, iso))
        data[k] = (Pb, comps)
        facs = [P.fibre(l) for l, _ in comps]
        labels = list(product(*[F.labels for F in facs]))
        fibres[k] = FinPoset(labels, lambda x, y, facs=facs: all(F.le(u, v) for F, u, v in zip(facs, x, y)))
    restrict = {}
    for m, (s, t, f) in enumerate(SA.cat.morphisms):
        Ps, cs = data[s]
        Pt, ct = data[t]
        tidx = {lab: j for j, lab in enumerate(Pt.labels)}
        toi = Pt.orbit_index()
        parts = []
        for (lvl_s, iso_s) in cs:
            # U' → U: point j of O_i' ↦ (f(x), y) in Pt, then back through iso_t^{-1}
            imgs = []
            for j in iso_s.source.points:
                x, y = Ps.labels[iso_s(j)]
                imgs.append(tidx[(f(x), y)])
            o = toi[imgs[0]]
            lvl_t, iso_t = ct[o]
            inv = {iso_t(q): q for q in iso_t.source.points}
            g = GMap(iso_s.source, iso_t.source, [inv[p] for p in imgs], check=False)
            parts.append((o, P.res(SV.morphism(lvl_s, lvl_t, g))))
        restrict[m] = MonotoneMap(fibres[t], fibres[s],
                                  lambda x, parts=parts: tuple(r(x[o]) for o, r in parts), check=False)
    out = ParamPoset(SA, fibres, restrict, name=f"{P.name}_*")
    out.components = data
    return out


def pushforward_cube_iso(O: OrbitCat, a: GMap, w: GMap):
    """a_*(w_*Δ¹) ≅ (aw)_*Δ¹ with explicit fibre bijections (from the pushforward side)."""
    cube = build_cube(O, w)
    push = pushforward(O, a, cube)
    aw = a.compose(w)
    big = build_cube(O, aw, push.S)
    maps = {}
    for k in range(len(push.S)):
        Pb, comps = push.components[k]
        Q = big.pullbacks[k][0]
        qidx = {lab: j for j, lab in enumerate(Q.labels)}
        qo = Q.orbit_index()
        # orbit o of U ×_V W, U = comps[u] ↦ orbit of C ×_A W containing (x, y)
        omaps = []
        for lvl, iso in comps:
            R = cube.pullbacks[lvl][0]
            om = []
            for orb, _ in R.orbits:
                j, y = R.labels[orb[0]]
                x, _v = Pb.labels[iso(j)]
                om.append(qo[qidx[(x, y)]])
            omaps.append(om)
        maps[k] = MonotoneMap(push.fibre(k), big.fibre(k),
                              lambda x, omaps=omaps: frozenset(om[o] for om, T in zip(omaps, x) for o in T))
    iso = ParamMonotoneMap(push, big, maps)
    if not iso.is_iso():
        raise CubeError("pushforward cube identification is not an isomorphism")
    return iso


def pushforward_singletons(O: OrbitCat, a: GMap, w: GMap):
    """θ: (a_!w_!∗)^◁ → a_*(w_!∗)^◁, and a check that ∏φ_w ∘ θ = φ_{aw} under the cube identification."""
    aw = a.compose(w)
    cube = build_cube(O, w)
    phi_w = singleton_inclusion(O, w, cube)
    sing_push = pushforward(O, a, phi_w.source)
    SA = sing_push.S
    big = build_cube(O, aw, SA)
    phi_aw = singleton_inclusion(O, aw, big)
    maps = {}
    for k in range(len(SA)):
        Pb, comps = sing_push.components[k]
        pidx = {lab: j for j, lab in enumerate(Pb.labels)}
        poi = Pb.orbit_index()

        def theta(t, comps=comps, pidx=pidx, poi=poi):
            bots = [BOT] * len(comps)
            if t == BOT:
                return tuple(bots)
            # the graph of w∘t is one orbit U0 of C ×_A V
            s = [w(y) for y in t]
            u0 = poi[pidx[(0, s[0])]]
            lvl, iso = comps[u0]
            # section of U0 → W: j ↦ t(x) where iso(j) = (x, s(x))
            sec = tuple(t[Pb.labels[iso(j)][0]] for j in iso.source.points)
            bots[u0] = sec
            return tuple(bots)

        maps[k] = MonotoneMap(phi_aw.source.fibre(k), sing_push.fibre(k), theta)
    theta_map = ParamMonotoneMap(phi_aw.source, sing_push, maps)
    iso = pushforward_cube_iso(O, a, w)
    for k in range(len(SA)):
        Pb, comps = sing_push.components[k]
        for t in phi_aw.source.fibre(k).labels:
            tup = theta_map.maps[k](t)
            subsets = tuple(phi_w.maps[lvl](x) for (lvl, _), x in zip(comps, tup))
            if iso.maps[k](subsets) != phi_aw.maps[k](t):
                raise CubeError(f"θ compatibility fails at level {k}, section {t}")
    return theta_map


# total poset --------------------------------------------------------------

class TotalPoset:
    """Grothendieck construction: objects (level, element); a morphism
    (b', e') → (b, e) is a slice map f: b' → b with e' ≤ f^* e."""

    def __init__(self, P: ParamPoset):
        self.P = P
        self.objects = [(k, x) for k in sorted(P.fibres) for x in P.fibre(k).labels]
        self.index = {o: j for j, o in enumerate(self.objects)}
        C = P.S.cat
        self.arrows = []
        for m in range(len(C.morphisms)):
            s, t = C.src(m), C.tgt(m)
            r = P.res(m)
            for e in P.fibre(t).labels:
                fe = r(e)
                for e2 in P.fibre(s).labels:
                    if P.fibre(s).le(e2, fe):
                        self.arrows.append((self.index[(s, e2)], self.index[(t, e)], m))

    def fibre_over(self, k) -> FinPoset:
        """Recover the fibre: objects over k with arrows over the identity."""
        idm = self.P.S.cat.identities[k]
        els = [x for (kk, x) in self.objects if kk == k]
        rel = {(self.objects[a][1], self.objects[b][1]) for a, b, m in self.arrows if m == idm}
        return FinPoset(els, rel)

    def projection_faithful(self) -> bool:
        seen = set()
        for a, b, m in self.arrows:
            if (a, b, m) in seen:
                return False
            seen.add((a, b, m))
        return True

    def __len__(self):
        return len(self.objects)


def fibres_complementable(P: ParamPoset) -> bool:
    return all(isinstance(L, FinLattice) and is_complementable(L) for L in P.fibres.values())


def downward_closed_everywhere(sub: ParamMonotoneMap) -> bool:
    return all(f.target.is_down_closed(f.image()) for f in sub.maps.values())
