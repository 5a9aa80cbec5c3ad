"""Finite groups, finite G-sets, orbit categories and their combinatorics.

Group elements are 0..n-1 with 0 not necessarily the identity; points of
a G-set are 0..m-1 with optional display labels.
"""

from __future__ import annotations

from functools import cached_property
from itertools import permutations, product

MAX_GROUP_ORDER = 24


class GroupError(ValueError):
    pass


class DiagonalNotSummand(AssertionError):
    pass


class FiniteGroup:
    def __init__(self, mult, name=None):
        self.mult = tuple(tuple(int(v) for v in row) for row in mult)
        n = len(self.mult)
        self.order = n
        self.name = name or f"G{n}"
        if n == 0 or n > MAX_GROUP_ORDER:
            raise GroupError(f"group order {n} outside 1..{MAX_GROUP_ORDER}")
        for row in self.mult:
            if len(row) != n or any(not 0 <= v < n for v in row):
                raise GroupError("multiplication table is not n×n over 0..n-1")
        ids = [e for e in range(n) if all(self.mult[e][g] == g and self.mult[g][e] == g for g in range(n))]
        if len(ids) != 1:
            raise GroupError("identity law")
        self.e = ids[0]
        m = self.mult
        for a in range(n):
            for b in range(n):
                for c in range(n):
                    if m[m[a][b]][c] != m[a][m[b][c]]:
                        raise GroupError(f"associativity at {(a, b, c)}")
        inv = []
        for a in range(n):
            cands = [b for b in range(n) if m[a][b] == self.e]
            if len(cands) != 1 or m[cands[0]][a] != self.e:
                raise GroupError(f"inverse law at {a}")
            inv.append(cands[0])
        self.inv = tuple(inv)

    def mul(self, a, b):
        return self.mult[a][b]

    @property
    def elements(self):
        return range(self.order)

    def generated(self, gens) -> frozenset:
        out = {self.e}
        frontier = [self.e]
        gens = list(gens)
        while frontier:
            nxt = []
            for x in frontier:
                for g in gens:
                    y = self.mult[x][g]
                    if y not in out:
                        out.add(y)
                        nxt.append(y)
            frontier = nxt
        return frozenset(out)

    @cached_property
    def subgroups(self):
        """All subgroups, sorted by (order, sorted elements)."""
        cyclic = {self.generated([g]) for g in self.elements}
        subs = set(cyclic)
        frontier = set(cyclic)
        while frontier:
            nxt = set()
            for H in frontier:
                for C in cyclic:
                    if not C <= H:
                        J = self.generated(H | C)
                        if J not in subs:
                            subs.add(J)
                            nxt.add(J)
            frontier = nxt
        return sorted(subs, key=_subkey)

    def conjugate(self, g, H) -> frozenset:
        gi = self.inv[g]
        return frozenset(self.mult[self.mult[g][h]][gi] for h in H)

    @cached_property
    def subgroup_classes(self):
        """Conjugacy-class representatives, each the smallest member of its class."""
        seen = set()
        reps = []
        for H in self.subgroups:
            if H in seen:
                continue
            cls = {self.conjugate(g, H) for g in self.elements}
            seen |= cls
            reps.append(min(cls, key=_subkey))
        return sorted(reps, key=_subkey)

    def is_subgroup(self, H) -> bool:
        H = frozenset(H)
        return self.e in H and all(self.mult[a][self.inv[b]] in H for a in H for b in H)

    def to_json(self):
        return {"order": self.order, "mult": [list(r) for r in self.mult]}

    def __eq__(self, other):
        return isinstance(other, FiniteGroup) and self.mult == other.mult

    def __hash__(self):
        return hash(self.mult)

    def __repr__(self):
        return self.name


def _subkey(H):
    return (len(H), tuple(sorted(H)))


def cyclic_group(n: int) -> FiniteGroup:
    return FiniteGroup([[(a + b) % n for b in range(n)] for a in range(n)], name=f"C{n}")


def symmetric_group(k: int) -> FiniteGroup:
    perms = sorted(permutations(range(k)))
    idx = {p: i for i, p in enumerate(perms)}
    # (p*q)(i) = p(q(i))
    mult = [[idx[tuple(p[q[i]] for i in range(k))] for q in perms] for p in perms]
    return FiniteGroup(mult, name=f"S{k}")


def group_by_name(name: str) -> FiniteGroup:
    name = name.strip()
    if name in ("1", "e", "trivial"):
        return cyclic_group(1)
    if name[:1] in "CZ" and name[1:].isdigit():
        return cyclic_group(int(name[1:]))
    if name[:1] == "S" and name[1:].isdigit():
        return symmetric_group(int(name[1:]))
    if name[:1] == "D" and name[1:].isdigit():
        return dihedral_group(int(name[1:]))
    raise GroupError(f"unknown group {name!r}")


def dihedral_group(n: int) -> FiniteGroup:
    """Symmetries of the n-gon, order 2n; elements (r^i s^j) indexed i + n*j."""
    def mul(a, b):
        i, j = a % n, a // n
        k, l = b % n, b // n
        r = (i + (k if j == 0 else -k)) % n
        return r + n * ((j + l) % 2)
    return FiniteGroup([[mul(a, b) for b in range(2 * n)] for a in range(2 * n)], name=f"D{n}")


def group_from_json(obj) -> FiniteGroup:
    if not isinstance(obj, dict) or "mult" not in obj:
        raise GroupError("group file needs order and mult")
    G = FiniteGroup(obj["mult"])
    if obj.get("order", G.order) != G.order:
        raise GroupError("order does not match table")
    return G


# G-sets ----------------------------------------------------------------

class GSet:
    def __init__(self, group: FiniteGroup, act, labels=None):
        self.group = group
        self.act = tuple(tuple(int(v) for v in row) for row in act)
        if len(self.act) != group.order:
            raise GroupError("action table needs one row per group element")
        n = len(self.act[0]) if self.act else 0
        self.size = n
        for row in self.act:
            if len(row) != n or any(not 0 <= v < n for v in row):
                raise GroupError("action row is not a self-map of the points")
        if self.act[group.e] != tuple(range(n)):
            raise GroupError("identity acts trivially")
        m = group.mult
        for g in group.elements:
            for h in group.elements:
                gh = m[g][h]
                for p in range(n):
                    if self.act[g][self.act[h][p]] != self.act[gh][p]:
                        raise GroupError(f"action law at g={g}, h={h}, p={p}")
        self.labels = tuple(labels) if labels is not None else tuple(range(n))
        if len(self.labels) != n:
            raise GroupError("label count")

    @property
    def points(self):
        return range(self.size)

    def __call__(self, g, p):
        return self.act[g][p]

    def orbit_of(self, p):
        return sorted({self.act[g][p] for g in self.group.elements})

    def stabilizer(self, p) -> frozenset:
        return frozenset(g for g in self.group.elements if self.act[g][p] == p)

    @cached_property
    def orbits(self):
        """(points, stabilizer of the smallest point), ordered by smallest point."""
        seen = set()
        out = []
        for p in self.points:
            if p in seen:
                continue
            orb = self.orbit_of(p)
            seen.update(orb)
            out.append((tuple(orb), self.stabilizer(p)))
        return out

    def orbit_index(self):
        idx = {}
        for k, (orb, _) in enumerate(self.orbits):
            for p in orb:
                idx[p] = k
        return idx

    def is_transitive(self):
        return len(self.orbits) == 1

    def fixed_points(self, H):
        return [p for p in self.points if all(self.act[h][p] == p for h in H)]

    def is_invariant(self, subset) -> bool:
        s = set(subset)
        return all(self.act[g][p] in s for g in self.group.elements for p in s)

    def to_json(self):
        return {"group": self.group.to_json(), "points": list(self.points),
                "act": [list(r) for r in self.act]}

    def __eq__(self, other):
        return isinstance(other, GSet) and self.group == other.group and self.act == other.act

    def __hash__(self):
        return hash((self.group, self.act))

    def __repr__(self):
        return f"GSet({self.group}, {self.size} pts, {len(self.orbits)} orbits)"


def gset_from_json(obj, group=None) -> GSet:
    if not isinstance(obj, dict) or "act" not in obj:
        raise GroupError("G-set file needs group, points, act")
    G = group or group_from_json(obj["group"])
    X = GSet(G, obj["act"])
    if list(obj.get("points", X.points)) != list(X.points):
        raise GroupError("points must be 0..n-1")
    return X


def empty_gset(G: FiniteGroup) -> GSet:
    return GSet(G, [[] for _ in G.elements])


def point(G: FiniteGroup) -> GSet:
    return GSet(G, [[0] for _ in G.elements], labels=["*"])


def trivial_gset(G: FiniteGroup, n: int) -> GSet:
    return GSet(G, [list(range(n)) for _ in G.elements])


def coset_gset(G: FiniteGroup, H) -> GSet:
    """G/H with left translation; cosets ordered by smallest element, eH first."""
    H = frozenset(H)
    if not G.is_subgroup(H):
        raise GroupError("not a subgroup")
    cosets = {}
    for g in G.elements:
        c = frozenset(G.mult[g][h] for h in H)
        cosets.setdefault(c, min(c))
    order = sorted(cosets, key=lambda c: min(c))
    idx = {c: i for i, c in enumerate(order)}
    which = {}
    for c in order:
        for g in c:
            which[g] = idx[c]
    act = [[which[G.mult[g][min(c)]] for c in order] for g in G.elements]
    return GSet(G, act, labels=[f"{min(c)}H" for c in order])


def free_orbit(G: FiniteGroup) -> GSet:
    return coset_gset(G, [G.e])


def disjoint_union(*Xs: GSet):
    """(X0 ⊔ X1 ⊔ ..., inclusions)."""
    G = Xs[0].group
    offs = []
    total = 0
    for X in Xs:
        offs.append(total)
        total += X.size
    act = [[X.act[g][p] + off for X, off in zip(Xs, offs) for p in X.points] for g in G.elements]
    labels = [(k, X.labels[p]) for k, X in enumerate(Xs) for p in X.points]
    U = GSet(G, act, labels=labels)
    incs = [GMap(X, U, [p + off for p in X.points]) for X, off in zip(Xs, offs)]
    return U, incs


def sub_gset(X: GSet, subset):
    """Invariant subset with its inclusion."""
    pts = sorted(set(subset))
    if not X.is_invariant(pts):
        raise GroupError("subset not invariant")
    idx = {p: i for i, p in enumerate(pts)}
    Y = GSet(X.group, [[idx[X.act[g][p]] for p in pts] for g in X.group.elements],
             labels=[X.labels[p] for p in pts])
    return Y, GMap(Y, X, pts)


class GMap:
    def __init__(self, source: GSet, target: GSet, mapping, check=True):
        self.source = source
        self.target = target
        self.map = tuple(int(v) for v in mapping)
        if check:
            if source.group != target.group:
                raise GroupError("maps need a common group")
            if len(self.map) != source.size or any(not 0 <= v < target.size for v in self.map):
                raise GroupError("map is not a function source → target")
            for g in source.group.elements:
                for p in source.points:
                    if self.map[source.act[g][p]] != target.act[g][self.map[p]]:
                        raise GroupError(f"equivariance at g={g}, p={p}")

    def __call__(self, p):
        return self.map[p]

    def compose(self, first: "GMap") -> "GMap":
        """self ∘ first."""
        return GMap(first.source, self.target, [self.map[q] for q in first.map], check=False)

    def is_iso(self) -> bool:
        return self.source.size == self.target.size and len(set(self.map)) == self.source.size

    def fibre(self, y):
        return [p for p in self.source.points if self.map[p] == y]

    def to_json(self):
        return {"source": self.source.to_json(), "target": self.target.to_json(), "map": list(self.map)}

    def __eq__(self, other):
        return (isinstance(other, GMap) and self.map == other.map
                and self.source == other.source and self.target == other.target)

    def __hash__(self):
        return hash(self.map)

    def __repr__(self):
        return f"GMap{list(self.map)}"


def identity(X: GSet) -> GMap:
    return GMap(X, X, list(X.points), check=False)


def to_point(X: GSet) -> GMap:
    return GMap(X, point(X.group), [0] * X.size, check=False)


def gmap_from_json(obj) -> GMap:
    S = gset_from_json(obj["source"])
    T = gset_from_json(obj["target"], group=S.group)
    return GMap(S, T, obj["map"])


def pullback(f: GMap, g: GMap):
    """X ×_Z Y on pairs (x, y) in lexicographic order, with the two projections."""
    if f.target != g.target:
        raise GroupError("pullback needs a common target")
    X, Y = f.source, g.source
    pairs = [(x, y) for x in X.points for y in Y.points if f(x) == g(y)]
    idx = {pr: i for i, pr in enumerate(pairs)}
    G = X.group
    act = [[idx[(X.act[h][x], Y.act[h][y])] for x, y in pairs] for h in G.elements]
    P = GSet(G, act, labels=pairs)
    return P, GMap(P, X, [x for x, _ in pairs], check=False), GMap(P, Y, [y for _, y in pairs], check=False)


def pullback_pairs(P: GSet):
    return list(P.labels)


def diagonal_complement(w: GMap):
    """W ×_V W = Δ(W) ⊔ C; returns (C, c, cbar)."""
    P, p1, p2 = pullback(w, w)
    diag = [i for i, (x, y) in enumerate(P.labels) if x == y]
    if not P.is_invariant(diag):
        raise DiagonalNotSummand("diagonal is not a union of orbits")
    rest = [i for i in P.points if i not in set(diag)]
    C, inc = sub_gset(P, rest)
    return C, p1.compose(inc), p2.compose(inc)


def brute_force_maps(X: GSet, Y: GSet):
    """All equivariant maps X → Y by exhaustive enumeration of functions."""
    out = []
    for f in product(range(Y.size), repeat=X.size):
        ok = all(f[X.act[g][p]] == Y.act[g][f[p]] for g in X.group.elements for p in X.points)
        if ok:
            out.append(GMap(X, Y, f, check=False))
    return out


def equivariant_maps(X: GSet, Y: GSet):
    """All equivariant maps X → Y, orbit by orbit via fixed points."""
    choices = []
    for orb, H in X.orbits:
        base = orb[0]
        opts = []
        for y in Y.fixed_points(H):
            assign = {}
            for g in X.group.elements:
                assign[X.act[g][base]] = Y.act[g][y]
            opts.append(assign)
        choices.append(opts)
    out = []
    for combo in product(*choices):
        f = [0] * X.size
        for assign in combo:
            for p, q in assign.items():
                f[p] = q
        out.append(GMap(X, Y, f, check=False))
    return sorted(out, key=lambda m: m.map)


# finite categories ---------------------------------------------------

class FinCategory:
    """A finite category with objects 0..n-1 and morphisms as ids.

    `morphisms[k] = (src, tgt, payload)`; composition is `comp[(g, f)]` for
    g ∘ f.  Built from payloads with a `compose` method and equality."""

    def __init__(self, objects, morphisms, compose, identities):
        self.objects = list(objects)
        self.morphisms = list(morphisms)
        self.identities = list(identities)
        self.hom = {}
        for k, (s, t, _) in enumerate(self.morphisms):
            self.hom.setdefault((s, t), []).append(k)
        self.comp = {}
        for g, (s2, t2, _) in enumerate(self.morphisms):
            for f in self.hom_ids_to(s2):
                self.comp[(g, f)] = compose(g, f)

    def hom_ids(self, s, t):
        return self.hom.get((s, t), [])

    def hom_ids_to(self, t):
        return [k for k, (_, tt, _) in enumerate(self.morphisms) if tt == t]

    def src(self, k):
        return self.morphisms[k][0]

    def tgt(self, k):
        return self.morphisms[k][1]

    def is_iso(self, f) -> bool:
        s, t = self.src(f), self.tgt(f)
        return any(self.comp[(g, f)] == self.identities[s] and self.comp[(f, g)] == self.identities[t]
                   for g in self.hom_ids(t, s))

    def check_axioms(self) -> bool:
        for (g, f), h in self.comp.items():
            if self.src(h) != self.src(f) or self.tgt(h) != self.tgt(g):
                return False
        for f in range(len(self.morphisms)):
            if self.comp[(self.identities[self.tgt(f)], f)] != f or self.comp[(f, self.identities[self.src(f)])] != f:
                return False
        for f in range(len(self.morphisms)):
            for g in self.hom_ids_from(self.tgt(f)):
                for h in self.hom_ids_from(self.tgt(g)):
                    if self.comp[(h, self.comp[(g, f)])] != self.comp[(self.comp[(h, g)], f)]:
                        return False
        return True

    def hom_ids_from(self, s):
        return [k for k, (ss, _, _) in enumerate(self.morphisms) if ss == s]


def category_of_gsets(objs) -> FinCategory:
    """Full subcategory of G-sets on the given objects, all maps enumerated."""
    morphisms = []
    lookup = {}
    for i, X in enumerate(objs):
        for j, Y in enumerate(objs):
            for m in equivariant_maps(X, Y):
                lookup[(i, j, m.map)] = len(morphisms)
                morphisms.append((i, j, m))
    ids = [lookup[(i, i, tuple(X.points))] for i, X in enumerate(objs)]

    def compose(g, f):
        si, _, fm = morphisms[f]
        _, tj, gm = morphisms[g]
        return lookup[(si, tj, gm.compose(fm).map)]

    return FinCategory(objs, morphisms, compose, ids)


def atomic_witness(C: FinCategory):
    """A composable pair (f, g) with g∘f invertible but f or g not, or None."""
    for f in range(len(C.morphisms)):
        for g in C.hom_ids_from(C.tgt(f)):
            if C.is_iso(C.comp[(g, f)]) and not (C.is_iso(f) and C.is_iso(g)):
                return (f, g)
    return None


def check_atomic(C) -> tuple:
    """(ok, witness)."""
    if isinstance(C, OrbitCat):
        C = C.category
    w = atomic_witness(C)
    return (w is None, w)


class OrbitCat:
    """Orbit category O_G: one transitive G-set G/H per conjugacy class of subgroups."""

    def __init__(self, group: FiniteGroup):
        self.group = group
        self.subgroups = list(group.subgroup_classes)
        self.objects = [coset_gset(group, H) for H in self.subgroups]
        self.category = category_of_gsets(self.objects)

    def index_of(self, X: GSet) -> int:
        """Index of the orbit isomorphic to the transitive X."""
        if not X.is_transitive():
            raise GroupError("not an orbit")
        H = X.orbits[0][1]
        for k, K in enumerate(self.subgroups):
            if any(self.group.conjugate(g, H) == K for g in self.group.elements):
                return k
        raise GroupError("stabilizer not found")

    def hom(self, i, j):
        return [self.category.morphisms[k][2] for k in self.category.hom_ids(i, j)]

    @property
    def terminal(self):
        return len(self.objects) - 1

    def name(self, i):
        H = self.subgroups[i]
        if len(H) == 1:
            return f"{self.group}/e"
        if len(H) == self.group.order:
            return f"{self.group}/{self.group}"
        return f"{self.group}/H{i}"

    def __len__(self):
        return len(self.objects)


def hom_orbits(O: OrbitCat, i, j):
    return O.hom(i, j)


def slice_length(O, V) -> int:
    """Longest chain of non-invertible maps ending at V."""
    C = O.category if isinstance(O, OrbitCat) else O
    memo = {}

    def ell(x):
        if x not in memo:
            memo[x] = -1
            best = 0
            for f in C.hom_ids_to(x):
                if not C.is_iso(f):
                    best = max(best, ell(C.src(f)) + 1)
            memo[x] = best
        return memo[x]

    return ell(V)


def slice_category(C: FinCategory, V) -> FinCategory:
    """C_{/V}: objects are morphisms into V, morphisms commuting triangles."""
    objs = C.hom_ids_to(V)
    morphisms = []
    lookup = {}
    for a, u in enumerate(objs):
        for b, u2 in enumerate(objs):
            for f in C.hom_ids(C.src(u), C.src(u2)):
                if C.comp[(u2, f)] == u:
                    lookup[(a, b, f)] = len(morphisms)
                    morphisms.append((a, b, f))
    ids = [lookup[(a, a, C.identities[C.src(u)])] for a, u in enumerate(objs)]

    def compose(g, f):
        a, _, fm = morphisms[f]
        _, c, gm = morphisms[g]
        return lookup[(a, c, C.comp[(gm, fm)])]

    return FinCategory(objs, morphisms, compose, ids)


def longest_noninvertible_chain(C: FinCategory) -> int:
    """Longest composable chain of non-invertible morphisms, by enumeration."""
    non = [f for f in range(len(C.morphisms)) if not C.is_iso(f)]
    best = 0
    frontier = [(f,) for f in non]
    k = 1
    while frontier:
        best = k
        frontier = [ch + (g,) for ch in frontier for g in non if C.src(g) == C.tgt(ch[-1])]
        k += 1
        if k > len(C.objects) + 1:
            break
    return best if non else 0
