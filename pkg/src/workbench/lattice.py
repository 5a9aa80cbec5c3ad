"""Finite posets and lattices, complements, excisable structures, faces.

Elements are arbitrary hashable labels (strings, ints, frozensets,
tuples).  Internally everything is indexed by position in a sorted label
tuple, and the order relation, meets and joins are tabulated eagerly.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from itertools import combinations, product

MAX_LATTICE_SIZE = 2 ** 8


class LatticeError(ValueError):
    """Structural validation failure; carries the violated axiom and a witness."""

    def __init__(self, axiom: str, witness=None):
        self.axiom = axiom
        self.witness = witness
        super().__init__(f"{axiom} failed" + (f" at {witness!r}" if witness is not None else ""))


class NoComplement(ValueError):
    def __init__(self, element):
        self.element = element
        super().__init__(f"element {element!r} has no complement")


class AmbiguousComplement(AssertionError):
    pass


class NotDisjoint(ValueError):
    pass


def label_key(x):
    """Total order on labels used for every deterministic listing."""
    if isinstance(x, bool):
        return (0, int(x))
    if isinstance(x, int):
        return (1, x)
    if isinstance(x, str):
        return (2, x)
    if isinstance(x, frozenset):
        return (3, len(x), tuple(sorted((label_key(e) for e in x))))
    if isinstance(x, tuple):
        return (4, len(x), tuple(label_key(e) for e in x))
    return (5, repr(x))


def show(x) -> str:
    if isinstance(x, frozenset):
        if not x:
            return "∅"
        return "{" + ",".join(show(e) for e in sorted(x, key=label_key)) + "}"
    if isinstance(x, tuple):
        return "(" + ",".join(show(e) for e in x) + ")"
    return str(x)


class FinPoset:
    """A finite poset given by its elements and order relation."""

    def __init__(self, labels, leq):
        labels = tuple(sorted(set(labels), key=label_key))
        self.labels = labels
        self.index = {x: i for i, x in enumerate(labels)}
        n = len(labels)
        if callable(leq):
            rel = [[bool(leq(a, b)) for b in labels] for a in labels]
        else:
            rel = [[False] * n for _ in range(n)]
            for a, b in leq:
                rel[self.index[a]][self.index[b]] = True
        self._le = rel
        self._validate_order()

    @classmethod
    def from_covers(cls, labels, covers):
        labels = list(labels)
        idx = {x: i for i, x in enumerate(labels)}
        n = len(labels)
        rel = [[i == j for j in range(n)] for i in range(n)]
        for a, b in covers:
            if a not in idx or b not in idx:
                raise LatticeError("covers reference known elements", (a, b))
            rel[idx[a]][idx[b]] = True
        for k in range(n):
            rk = rel[k]
            for i in range(n):
                if rel[i][k]:
                    ri = rel[i]
                    for j in range(n):
                        if rk[j]:
                            ri[j] = True
        pairs = [(labels[i], labels[j]) for i in range(n) for j in range(n) if rel[i][j]]
        return cls(labels, pairs)

    def _validate_order(self):
        n = len(self.labels)
        le = self._le
        for i in range(n):
            if not le[i][i]:
                raise LatticeError("reflexivity", self.labels[i])
        for i in range(n):
            for j in range(i + 1, n):
                if le[i][j] and le[j][i]:
                    raise LatticeError("antisymmetry", (self.labels[i], self.labels[j]))
        for i in range(n):
            for j in range(n):
                if le[i][j]:
                    for k in range(n):
                        if le[j][k] and not le[i][k]:
                            raise LatticeError("transitivity", (self.labels[i], self.labels[j], self.labels[k]))

    def __len__(self):
        return len(self.labels)

    def __iter__(self):
        return iter(self.labels)

    def __contains__(self, x):
        return x in self.index

    def le(self, a, b) -> bool:
        return self._le[self.index[a]][self.index[b]]

    def lt(self, a, b) -> bool:
        return a != b and self.le(a, b)

    def down(self, x):
        i = self.index[x]
        return [y for j, y in enumerate(self.labels) if self._le[j][i]]

    def up(self, x):
        i = self.index[x]
        return [y for j, y in enumerate(self.labels) if self._le[i][j]]

    @cached_property
    def covers(self):
        out = []
        n = len(self.labels)
        le = self._le
        for i in range(n):
            for j in range(n):
                if i != j and le[i][j]:
                    if not any(k != i and k != j and le[i][k] and le[k][j] for k in range(n)):
                        out.append((self.labels[i], self.labels[j]))
        return out

    @cached_property
    def lower_covers(self):
        d = {x: [] for x in self.labels}
        for a, b in self.covers:
            d[b].append(a)
        return d

    @cached_property
    def upper_covers(self):
        d = {x: [] for x in self.labels}
        for a, b in self.covers:
            d[a].append(b)
        return d

    @cached_property
    def linear_order(self):
        """Labels listed so that x <= y implies x comes first."""
        return sorted(self.labels, key=lambda x: (len(self.down(x)), label_key(x)))

    def minimal(self):
        return [x for x in self.labels if not self.lower_covers[x]]

    def maximal(self):
        return [x for x in self.labels if not self.upper_covers[x]]

    @cached_property
    def bottom(self):
        m = self.minimal()
        if len(m) == 1 and all(self.le(m[0], y) for y in self.labels):
            return m[0]
        return None

    @cached_property
    def top(self):
        m = self.maximal()
        if len(m) == 1 and all(self.le(y, m[0]) for y in self.labels):
            return m[0]
        return None

    def sub(self, subset) -> "FinPoset":
        subset = [x for x in self.labels if x in set(subset)]
        return FinPoset(subset, lambda a, b: self.le(a, b))

    def is_down_closed(self, subset) -> bool:
        s = set(subset)
        return all(y in s for x in s for y in self.down(x))

    def is_up_closed(self, subset) -> bool:
        s = set(subset)
        return all(y in s for x in s for y in self.up(x))

    def chains(self, max_len=None):
        """All strictly increasing chains, shortest first, deterministic."""
        out = [(x,) for x in self.linear_order]
        frontier = list(out)
        k = 1
        while frontier and (max_len is None or k < max_len):
            nxt = []
            for ch in frontier:
                for y in self.linear_order:
                    if self.lt(ch[-1], y):
                        nxt.append(ch + (y,))
            out.extend(nxt)
            frontier = nxt
            k += 1
        return out

    def is_connected(self) -> bool:
        if not self.labels:
            return False
        seen = {self.labels[0]}
        stack = [self.labels[0]]
        while stack:
            x = stack.pop()
            for y in self.upper_covers[x] + self.lower_covers[x]:
                if y not in seen:
                    seen.add(y)
                    stack.append(y)
        return len(seen) == len(self.labels)

    def __eq__(self, other):
        return isinstance(other, FinPoset) and self.labels == other.labels and self._le == other._le

    def __hash__(self):
        return hash((self.labels, tuple(map(tuple, self._le))))

    def __repr__(self):
        return f"{type(self).__name__}({[show(x) for x in self.labels]})"


class FinLattice(FinPoset):
    """Finite lattice with tabulated meet and join."""

    def __init__(self, labels, leq):
        super().__init__(labels, leq)
        n = len(self.labels)
        if n == 0:
            raise LatticeError("nonempty", None)
        if n > MAX_LATTICE_SIZE:
            raise LatticeError(f"size cap {MAX_LATTICE_SIZE}", n)
        le = self._le
        meet = [[0] * n for _ in range(n)]
        join = [[0] * n for _ in range(n)]
        for i in range(n):
            for j in range(i, n):
                lower = [k for k in range(n) if le[k][i] and le[k][j]]
                g = [k for k in lower if all(le[m][k] for m in lower)]
                if len(g) != 1:
                    raise LatticeError("meet exists", (self.labels[i], self.labels[j]))
                upper = [k for k in range(n) if le[i][k] and le[j][k]]
                lu = [k for k in upper if all(le[k][m] for m in upper)]
                if len(lu) != 1:
                    raise LatticeError("join exists", (self.labels[i], self.labels[j]))
                meet[i][j] = meet[j][i] = g[0]
                join[i][j] = join[j][i] = lu[0]
        self._meet = meet
        self._join = join
        if self.bottom is None or self.top is None:
            raise LatticeError("bounded", None)

    def meet(self, a, b):
        return self.labels[self._meet[self.index[a]][self.index[b]]]

    def join(self, a, b):
        return self.labels[self._join[self.index[a]][self.index[b]]]

    def meet_all(self, xs):
        out = self.top
        for x in xs:
            out = self.meet(out, x)
        return out

    def join_all(self, xs):
        out = self.bottom
        for x in xs:
            out = self.join(out, x)
        return out

    @property
    def degenerate(self) -> bool:
        """One-element lattice, where bottom and top coincide."""
        return len(self.labels) == 1

    @cached_property
    def atoms(self):
        b = self.bottom
        return [x for x in self.labels if x != b and self.lower_covers[x] == [b]]

    def sublattice(self, subset) -> "FinLattice":
        subset = [x for x in self.labels if x in set(subset)]
        return FinLattice(subset, lambda a, b: self.le(a, b))


# constructors ---------------------------------------------------------

_POWERSETS = {}


def powerset_lattice(base) -> FinLattice:
    """Subsets of `base` (or of 1..n for an int), shared between callers since lattices are immutable."""
    if isinstance(base, int):
        base = range(1, base + 1)
    base = tuple(base)
    if base not in _POWERSETS:
        _POWERSETS[base] = _powerset(base)
    return _POWERSETS[base]


def _powerset(base) -> FinLattice:
    subs = [frozenset(c) for k in range(len(base) + 1) for c in combinations(base, k)]
    return FinLattice(subs, lambda a, b: a <= b)


def chain_lattice(n: int) -> FinLattice:
    """Chain 0 < 1 < ... < n-1."""
    return FinLattice(range(n), lambda a, b: a <= b)


def diamond_m3() -> FinLattice:
    return FinLattice.from_covers(["0", "a", "b", "c", "1"],
                                  [("0", "a"), ("0", "b"), ("0", "c"), ("a", "1"), ("b", "1"), ("c", "1")])


def pentagon_n5() -> FinLattice:
    return FinLattice.from_covers(["0", "a", "b", "c", "1"],
                                  [("0", "a"), ("a", "b"), ("b", "1"), ("0", "c"), ("c", "1")])


def product_lattice(a: FinLattice, b: FinLattice) -> FinLattice:
    return FinLattice(list(product(a.labels, b.labels)),
                      lambda x, y: a.le(x[0], y[0]) and b.le(x[1], y[1]))


# distributivity and complements ---------------------------------------

def distributivity_witness(L: FinLattice):
    """First triple (a, b, c) with (a∧c)∨(b∧c) ≠ (a∨b)∧c, or None."""
    for a in L.labels:
        for b in L.labels:
            for c in L.labels:
                if L.join(L.meet(a, c), L.meet(b, c)) != L.meet(L.join(a, b), c):
                    return (a, b, c)
    return None


def check_distributive(L: FinLattice) -> bool:
    return distributivity_witness(L) is None


def complement(L: FinLattice, x):
    cands = [y for y in L.labels if L.join(x, y) == L.top and L.meet(x, y) == L.bottom]
    if not cands:
        raise NoComplement(x)
    if len(cands) > 1:
        raise AmbiguousComplement(f"{x!r} has complements {cands!r}; lattice is not distributive")
    return cands[0]


def complementation(L: FinLattice) -> dict:
    """The complement map; raises NoComplement on the first failure."""
    comp = {x: complement(L, x) for x in L.labels}
    for x in L.labels:
        assert comp[comp[x]] == x
    return comp


def is_complementable(L: FinLattice) -> bool:
    if not check_distributive(L):
        return False
    try:
        complementation(L)
    except NoComplement:
        return False
    return True


def atom_map_is_iso(L: FinLattice) -> bool:
    """x ↦ {atoms below x} is a lattice isomorphism onto the powerset of atoms."""
    atoms = L.atoms
    img = {x: frozenset(a for a in atoms if L.le(a, x)) for x in L.labels}
    if len(set(img.values())) != len(L.labels) or len(L.labels) != 2 ** len(atoms):
        return False
    return all((img[x] <= img[y]) == L.le(x, y) for x in L.labels for y in L.labels)


# monotone maps and adjunctions ----------------------------------------

class MonotoneMap:
    def __init__(self, source: FinPoset, target: FinPoset, mapping, check=True):
        if callable(mapping):
            mapping = {x: mapping(x) for x in source.labels}
        self.source = source
        self.target = target
        self.mapping = dict(mapping)
        if check:
            for x in source.labels:
                if self.mapping.get(x) not in target.index:
                    raise LatticeError("map lands in target", x)
            for x in source.labels:
                for y in source.labels:
                    if source.le(x, y) and not target.le(self.mapping[x], self.mapping[y]):
                        raise LatticeError("monotonicity", (x, y))

    def __call__(self, x):
        return self.mapping[x]

    def compose(self, first: "MonotoneMap") -> "MonotoneMap":
        """self ∘ first."""
        return MonotoneMap(first.source, self.target, {x: self.mapping[first(x)] for x in first.source.labels})

    def is_injective(self) -> bool:
        return len(set(self.mapping.values())) == len(self.mapping)

    def is_full(self) -> bool:
        """Order-reflecting: f(x) <= f(y) implies x <= y."""
        s = self.source
        return all(s.le(x, y) or not self.target.le(self(x), self(y)) for x in s.labels for y in s.labels)

    def image(self):
        return [y for y in self.target.labels if y in set(self.mapping.values())]

    def __eq__(self, other):
        return isinstance(other, MonotoneMap) and self.mapping == other.mapping

    def __repr__(self):
        return "MonotoneMap{" + ", ".join(f"{show(k)}↦{show(v)}" for k, v in self.mapping.items()) + "}"


def identity_map(P: FinPoset) -> MonotoneMap:
    return MonotoneMap(P, P, {x: x for x in P.labels}, check=False)


def galois_witness(f: MonotoneMap, g: MonotoneMap):
    """First (p, q) where f(p) <= q and p <= g(q) disagree, or None."""
    if f.target != g.source or g.target != f.source:
        raise LatticeError("shape match for adjunction", None)
    P, Q = f.source, f.target
    for p in P.labels:
        for q in Q.labels:
            if Q.le(f(p), q) != P.le(p, g(q)):
                return (p, q)
    return None


def check_galois(f: MonotoneMap, g: MonotoneMap) -> bool:
    """f ⊣ g, checked exhaustively."""
    return galois_witness(f, g) is None


# smashing subposets ---------------------------------------------------

@dataclass
class SmashLocalization:
    Lx: FinLattice
    project: MonotoneMap
    incl_bot: MonotoneMap
    incl_comp: MonotoneMap


def smashing_subposet(L: FinLattice, x) -> FinLattice:
    return L.sublattice({L.meet(x, a) for a in L.labels})


def smash_localization(L: FinLattice, x) -> SmashLocalization:
    xc = complement(L, x)
    Lx = smashing_subposet(L, x)
    project = MonotoneMap(L, Lx, lambda a: L.meet(x, a))
    incl_bot = MonotoneMap(Lx, L, lambda u: L.join(L.bottom, u))
    incl_comp = MonotoneMap(Lx, L, lambda u: L.join(xc, u))
    assert incl_bot.is_full() and incl_comp.is_full()
    assert project.compose(incl_bot) == identity_map(Lx)
    assert project.compose(incl_comp) == identity_map(Lx)
    return SmashLocalization(Lx, project, incl_bot, incl_comp)


def smash_adjunctions_hold(s: SmashLocalization) -> bool:
    """incl_bot ⊣ project ⊣ incl_comp."""
    return check_galois(s.incl_bot, s.project) and check_galois(s.project, s.incl_comp)


def complement_decomposition(L: FinLattice, x):
    """L ≅ L_x × L_{x^c} via a ↦ (x∧a, x^c∧a) and (u, v) ↦ u∨v."""
    xc = complement(L, x)
    P = product_lattice(smashing_subposet(L, x), smashing_subposet(L, xc))
    fwd = MonotoneMap(L, P, lambda a: (L.meet(x, a), L.meet(xc, a)))
    bwd = MonotoneMap(P, L, lambda uv: L.join(uv[0], uv[1]))
    return fwd, bwd


def decomposition_round_trips(L: FinLattice, x) -> bool:
    fwd, bwd = complement_decomposition(L, x)
    return bwd.compose(fwd) == identity_map(L) and fwd.compose(bwd) == identity_map(fwd.target)


def join_galois_pair(L: FinLattice, x):
    """(x^c∧−, x∨−), a left/right adjoint pair on L."""
    xc = complement(L, x)
    return (MonotoneMap(L, L, lambda a: L.meet(xc, a)), MonotoneMap(L, L, lambda a: L.join(x, a)))


# excisable structures -------------------------------------------------

class ExcisableStructure:
    def __init__(self, L: FinLattice, subset):
        subset = frozenset(subset)
        if not subset:
            raise LatticeError("excisable structure nonempty", None)
        for y in subset:
            if y not in L.index:
                raise LatticeError("excisable structure inside lattice", y)
        if not L.is_down_closed(subset):
            bad = next((x, y) for y in subset for x in L.down(y) if x not in subset)
            raise LatticeError("downward closure", bad)
        self.L = L
        self.subset = subset

    @property
    def poset(self) -> FinPoset:
        return self.L.sub(self.subset)

    def __contains__(self, x):
        return x in self.subset

    def __repr__(self):
        return "σ{" + ", ".join(show(x) for x in sorted(self.subset, key=label_key)) + "}"


def singleton_star(L: FinLattice) -> ExcisableStructure:
    """Bottom together with the atoms."""
    return ExcisableStructure(L, [L.bottom] + L.atoms)


def size_at_most(L: FinLattice, k: int) -> ExcisableStructure:
    return ExcisableStructure(L, [x for x in L.labels if len(x) <= k])


def induced_excisable(L: FinLattice, sigma: ExcisableStructure, x) -> ExcisableStructure:
    Lx = smashing_subposet(L, x)
    img = {L.meet(x, s) for s in sigma.subset}
    return ExcisableStructure(Lx, img)


# decomposition triples and faces -------------------------------------

@dataclass(frozen=True)
class DecompositionTriple:
    a: object
    d: object
    z: object


def decomposition_triple(L: FinLattice, a, d) -> DecompositionTriple:
    if L.meet(a, d) != L.bottom:
        raise NotDisjoint(f"{show(a)} ∧ {show(d)} ≠ ∅")
    z = complement(L, L.join(a, d))
    assert L.meet(a, z) == L.bottom and L.meet(d, z) == L.bottom
    assert L.join(a, L.join(d, z)) == L.top
    return DecompositionTriple(a, d, z)


def face_map(L: FinLattice, a, d) -> MonotoneMap:
    """y ↦ d∨y from L_a into L."""
    decomposition_triple(L, a, d)
    La = smashing_subposet(L, a)
    phi = MonotoneMap(La, L, lambda y: L.join(d, y))
    assert phi.is_injective() and phi.is_full()
    return phi


def disjoint_partners(L: FinLattice, a):
    return [d for d in L.labels if L.meet(a, d) == L.bottom]


def face_colocalisation(L: FinLattice, a, d):
    """(d∨−: L_a → L_{d/}, a∧−: L_{d/} → L_a), which should be an adjoint pair."""
    La = smashing_subposet(L, a)
    up = L.sub(L.up(d))
    return (MonotoneMap(La, up, lambda y: L.join(d, y)), MonotoneMap(up, La, lambda t: L.meet(a, t)))


# serialization --------------------------------------------------------

def label_to_json(x):
    if isinstance(x, frozenset):
        return sorted((label_to_json(e) for e in x), key=lambda v: (isinstance(v, str), v))
    if isinstance(x, tuple):
        return {"pair": [label_to_json(e) for e in x]}
    return x


def label_from_json(v):
    if isinstance(v, list):
        return frozenset(label_from_json(e) for e in v)
    if isinstance(v, dict) and "pair" in v:
        return tuple(label_from_json(e) for e in v["pair"])
    return v


def lattice_to_json(L: FinPoset) -> dict:
    return {"elements": [label_to_json(x) for x in L.labels],
            "covers": [[label_to_json(a), label_to_json(b)] for a, b in L.covers]}


def lattice_from_json(obj: dict, cls=FinLattice) -> FinPoset:
    if not isinstance(obj, dict) or "elements" not in obj or "covers" not in obj:
        raise LatticeError("lattice file has elements and covers", None)
    labels = [label_from_json(e) for e in obj["elements"]]
    if len(set(labels)) != len(labels):
        raise LatticeError("element ids distinct", None)
    covers = [(label_from_json(a), label_from_json(b)) for a, b in obj["covers"]]
    p = FinPoset.from_covers(labels, covers)
    if cls is FinPoset:
        return p
    return cls(p.labels, lambda a, b: p.le(a, b))
