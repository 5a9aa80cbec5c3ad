"""Bounded chain complexes of finite-dimensional rational vector spaces.

Homological grading: d_n maps degree n to degree n-1.  Homotopy (co)limits
over finite posets use normalized (co)simplicial replacement:

    hocolim F = ⊕ over chains p0<...<pk of F(p0)[k]
    holim F   = ∏ over chains p0<...<pk of F(pk)[-k]

with total differential D = d_int + (-1)^m ∂, where m is the internal degree
of the element and ∂ is the alternating sum of face maps.  Every other
construction below takes its signs from this one rule.
"""

from __future__ import annotations

from .lattice import FinPoset, show
from .linalg import Mat

DEGREE_RANGE = (-8, 8)
TOTAL_DIM_CAP = 64


class ComplexError(ValueError):
    pass


class ChainComplex:
    def __init__(self, dims, d=None, check=True):
        self.dims = {int(k): int(v) for k, v in dims.items() if v}
        d = d or {}
        self.d = {}
        for n in self.dims:
            if n - 1 in self.dims:
                m = d.get(n)
                if m is None:
                    m = Mat.zeros(self.dims[n - 1], self.dims[n])
                if m.shape != (self.dims[n - 1], self.dims[n]):
                    raise ComplexError(f"d_{n} has shape {m.shape}")
                self.d[n] = m
        if check:
            for n in self.d:
                if n - 1 in self.d and not (self.d[n - 1] @ self.d[n]).is_zero():
                    raise ComplexError(f"d_{n - 1} d_{n} != 0")

    @classmethod
    def zero(cls):
        return cls({})

    @classmethod
    def concentrated(cls, dim: int, degree: int = 0):
        return cls({degree: dim})

    def dim(self, n) -> int:
        return self.dims.get(n, 0)

    def diff(self, n) -> Mat:
        if n in self.d:
            return self.d[n]
        return Mat.zeros(self.dim(n - 1), self.dim(n))

    @property
    def degrees(self):
        return sorted(self.dims)

    def total_dim(self) -> int:
        return sum(self.dims.values())

    def check_bounds(self):
        lo, hi = DEGREE_RANGE
        if any(n < lo or n > hi for n in self.dims):
            raise ComplexError(f"degrees {self.degrees} leave the range [{lo}, {hi}]")
        if self.total_dim() > TOTAL_DIM_CAP:
            raise ComplexError(f"total dimension {self.total_dim()} exceeds {TOTAL_DIM_CAP}")

    def homology(self) -> dict:
        """Nonzero homology ranks by degree."""
        out = {}
        for n in self.dims:
            h = self.dims[n] - self.diff(n).rank() - self.diff(n + 1).rank()
            if h:
                out[n] = h
        return out

    def euler(self) -> int:
        return sum((-1) ** n * k for n, k in self.dims.items())

    def is_acyclic(self) -> bool:
        return not self.homology()

    def shift(self, k: int = 1) -> "ChainComplex":
        """Σ^k: degree n moves to n+k, differential scaled by (-1)^k."""
        sgn = -1 if k % 2 else 1
        return ChainComplex({n + k: v for n, v in self.dims.items()},
                            {n + k: m.scale(sgn) for n, m in self.d.items()}, check=False)

    def __eq__(self, other):
        return isinstance(other, ChainComplex) and self.dims == other.dims and self.d == other.d

    def __repr__(self):
        return "ChainComplex(" + ", ".join(f"{n}:{self.dims[n]}" for n in self.degrees) + ")"

    def to_json(self) -> dict:
        degs = self.degrees
        return {"range": [degs[0], degs[-1]] if degs else [0, 0],
                "dims": {str(n): self.dims[n] for n in degs},
                "d": {str(n): m.to_strings() for n, m in sorted(self.d.items())}}

    @classmethod
    def from_json(cls, obj) -> "ChainComplex":
        dims = {int(k): v for k, v in obj["dims"].items()}
        d = {int(k): Mat.from_rows(v, m=dims.get(int(k) - 1, 0), n=dims.get(int(k), 0))
             for k, v in obj.get("d", {}).items()}
        C = cls(dims, d)
        lo, hi = obj.get("range", [min(dims, default=0), max(dims, default=0)])
        if any(n < lo or n > hi for n in C.dims):
            raise ComplexError("dims outside the declared range")
        return C


def direct_sum(cs) -> tuple:
    """(⊕ cs, inclusions, projections)."""
    cs = list(cs)
    degs = sorted({n for c in cs for n in c.dims})
    dims = {n: sum(c.dim(n) for c in cs) for n in degs}
    d = {n: Mat.block_diag([c.diff(n) for c in cs]) for n in degs}
    S = ChainComplex(dims, d, check=False)
    incs, projs = [], []
    for k, c in enumerate(cs):
        inc, prj = {}, {}
        for n in degs:
            off = sum(cs[j].dim(n) for j in range(k))
            inc[n] = Mat.vstack([Mat.zeros(off, c.dim(n)), Mat.eye(c.dim(n)),
                                 Mat.zeros(dims[n] - off - c.dim(n), c.dim(n))], n=c.dim(n))
            prj[n] = inc[n].T
        incs.append(ChainMap(c, S, inc, check=False))
        projs.append(ChainMap(S, c, prj, check=False))
    return S, incs, projs


class ChainMap:
    def __init__(self, source: ChainComplex, target: ChainComplex, comps, check=True):
        self.source = source
        self.target = target
        self.comps = {}
        for n in set(source.dims) | set(target.dims):
            m = comps.get(n)
            if m is None:
                m = Mat.zeros(target.dim(n), source.dim(n))
            if m.shape != (target.dim(n), source.dim(n)):
                raise ComplexError(f"component {n} has shape {m.shape}")
            self.comps[n] = m
        if check and not self.is_chain_map():
            raise ComplexError("components do not commute with the differentials")

    def at(self, n) -> Mat:
        return self.comps.get(n, Mat.zeros(self.target.dim(n), self.source.dim(n)))

    def is_chain_map(self) -> bool:
        for n in set(self.source.dims) | set(self.target.dims) | {k + 1 for k in self.source.dims}:
            if self.target.diff(n) @ self.at(n) != self.at(n - 1) @ self.source.diff(n):
                return False
        return True

    def compose(self, first: "ChainMap") -> "ChainMap":
        """self ∘ first."""
        return ChainMap(first.source, self.target,
                        {n: self.at(n) @ first.at(n) for n in first.source.dims}, check=False)

    def __add__(self, other):
        return ChainMap(self.source, self.target,
                        {n: self.at(n) + other.at(n) for n in self.source.dims}, check=False)

    def scale(self, c):
        return ChainMap(self.source, self.target, {n: m.scale(c) for n, m in self.comps.items()}, check=False)

    def __eq__(self, other):
        keys = set(self.comps) | set(other.comps)
        return all(self.at(n) == other.at(n) for n in keys)

    def cone(self) -> ChainComplex:
        """Cone(f)_n = X_{n-1} ⊕ Y_n with d(x, y) = (-dx, fx + dy)."""
        X, Y = self.source, self.target
        degs = sorted({n + 1 for n in X.dims} | set(Y.dims))
        dims = {n: X.dim(n - 1) + Y.dim(n) for n in degs}
        d = {}
        for n in degs:
            if n - 1 not in dims:
                continue
            d[n] = Mat.blocks({(0, 0): X.diff(n - 1).scale(-1), (1, 0): self.at(n - 1), (1, 1): Y.diff(n)},
                              [X.dim(n - 2), Y.dim(n - 1)], [X.dim(n - 1), Y.dim(n)])
        return ChainComplex(dims, d)

    def is_qiso(self) -> bool:
        return self.cone().is_acyclic()

    def homology_map_ranks(self) -> dict:
        """Rank of H_n(f) for every degree with nonzero source homology."""
        out = {}
        X, Y = self.source, self.target
        for n in X.dims:
            Zx = X.diff(n).nullspace()
            if Zx.cols == 0:
                continue
            By = Y.diff(n + 1)
            img = self.at(n) @ Zx
            r = Mat.hstack([img, By], m=Y.dim(n)).rank() - By.rank()
            if X.dim(n) - X.diff(n).rank() - X.diff(n + 1).rank():
                out[n] = r
        return out


def identity_map(C: ChainComplex) -> ChainMap:
    return ChainMap(C, C, {n: Mat.eye(k) for n, k in C.dims.items()}, check=False)


def zero_map(X: ChainComplex, Y: ChainComplex) -> ChainMap:
    return ChainMap(X, Y, {}, check=False)


# diagrams of chain complexes ------------------------------------------------

class ChainDiagram:
    """Functor from a finite poset to chain complexes; maps stored on covers."""

    def __init__(self, shape: FinPoset, objects: dict, edges: dict, check=True):
        self.shape = shape
        self.objects = {x: objects.get(x) or ChainComplex.zero() for x in shape.labels}
        self.edges = {}
        for a, b in shape.covers:
            f = edges.get((a, b))
            if f is None:
                f = zero_map(self.objects[a], self.objects[b])
            self.edges[(a, b)] = f
        self._maps = {}
        P = shape
        for x in reversed(P.linear_order):
            self._maps[(x, x)] = identity_map(self.objects[x])
            for y in P.up(x):
                if y == x:
                    continue
                cands = [c for c in P.upper_covers[x] if P.le(c, y)]
                first = self._maps[(cands[0], y)].compose(self.edges[(x, cands[0])])
                if check:
                    for c in cands[1:]:
                        if self._maps[(c, y)].compose(self.edges[(x, c)]) != first:
                            raise ComplexError(f"functoriality fails between {show(x)} and {show(y)}")
                self._maps[(x, y)] = first
        if check:
            for f in self.edges.values():
                if not f.is_chain_map():
                    raise ComplexError("an edge map is not a chain map")

    def map(self, x, y) -> ChainMap:
        return self._maps[(x, y)]


class _Assembler:
    """Collects (cell, degree) blocks of a total complex and their differential entries."""

    def __init__(self):
        self.blocks = {}   # total degree -> list of (key, dim)
        self.offs = {}     # (key, total degree) -> offset

    def add(self, key, n, dim):
        if dim == 0:
            return
        lst = self.blocks.setdefault(n, [])
        self.offs[(key, n)] = sum(k for _, k in lst)
        lst.append((key, dim))

    def dims(self):
        return {n: sum(k for _, k in lst) for n, lst in self.blocks.items()}

    def build(self, pieces):
        """pieces: iterable of (src key, tgt key, total degree n, Mat) contributing to D_n."""
        dims = self.dims()
        ent = {}
        for sk, tk, n, m in pieces:
            so = self.offs.get((sk, n))
            to = self.offs.get((tk, n - 1))
            if so is None or to is None:
                continue
            e = ent.setdefault(n, {})
            for i, j, v in m.entries():
                key = (to + i, so + j)
                e[key] = e.get(key, 0) + v
        d = {n: Mat.from_dict(e, dims.get(n - 1, 0), dims[n]) for n, e in ent.items()
             if n in dims and n - 1 in dims}
        return ChainComplex(dims, d)


def hocolim_poset(F: ChainDiagram, max_len=None) -> ChainComplex:
    """Normalized simplicial replacement; see the module docstring for signs."""
    P = F.shape
    chains = P.chains(max_len)
    asm = _Assembler()
    for s in chains:
        k = len(s) - 1
        for m, dim in F.objects[s[0]].dims.items():
            asm.add((s, m), m + k, dim)
    pieces = []
    for s in chains:
        k = len(s) - 1
        X = F.objects[s[0]]
        for m in X.dims:
            n = m + k
            if m - 1 in X.dims:
                pieces.append(((s, m), (s, m - 1), n, X.diff(m)))
            if k == 0:
                continue
            sg = -1 if m % 2 else 1
            for i in range(k + 1):
                t = s[:i] + s[i + 1:]
                if i == 0:
                    f = F.map(s[0], s[1]).at(m)
                else:
                    f = Mat.eye(X.dim(m))
                c = sg * (-1 if i % 2 else 1)
                pieces.append(((s, m), (t, m), n, f.scale(c)))
    return asm.build(pieces)


def holim_poset(F: ChainDiagram, max_len=None) -> ChainComplex:
    """Normalized cosimplicial replacement; see the module docstring for signs."""
    P = F.shape
    chains = P.chains(max_len)
    asm = _Assembler()
    for s in chains:
        k = len(s) - 1
        for m, dim in F.objects[s[-1]].dims.items():
            asm.add((s, m), m - k, dim)
    pieces = []
    # coface δ: component at τ (k+1 chain) = Σ_i (-1)^i x_{d_i τ} moved into F(τ_{k+1})
    for t in chains:
        k1 = len(t) - 1
        if k1 == 0:
            continue
        for i in range(k1 + 1):
            s = t[:i] + t[i + 1:]
            X = F.objects[s[-1]]
            for m in X.dims:
                if i == k1:
                    f = F.map(s[-1], t[-1]).at(m)
                else:
                    f = Mat.eye(X.dim(m))
                c = (-1 if m % 2 else 1) * (-1 if i % 2 else 1)
                pieces.append(((s, m), (t, m), m - (k1 - 1), f.scale(c)))
    for s in chains:
        k = len(s) - 1
        X = F.objects[s[-1]]
        for m in X.dims:
            if m - 1 in X.dims:
                pieces.append(((s, m), (s, m - 1), m - k, X.diff(m)))
    return asm.build(pieces)


def hocolim_induced(F: ChainDiagram, G: ChainDiagram, phi, eta, HF=None, HG=None) -> ChainMap:
    """hocolim F → hocolim G along monotone phi: F.shape → G.shape and eta_p: F(p) → G(phi p).

    Chains whose image is degenerate go to zero.
    """
    HF = HF or hocolim_poset(F)
    HG = HG or hocolim_poset(G)
    asmF, asmG = _Assembler(), _Assembler()
    for s in F.shape.chains():
        for m, dim in F.objects[s[0]].dims.items():
            asmF.add((s, m), m + len(s) - 1, dim)
    for s in G.shape.chains():
        for m, dim in G.objects[s[0]].dims.items():
            asmG.add((s, m), m + len(s) - 1, dim)
    ent = {}
    for s in F.shape.chains():
        t = tuple(phi(x) for x in s)
        if len(set(t)) != len(t):
            continue
        for m in F.objects[s[0]].dims:
            n = m + len(s) - 1
            so, to = asmF.offs.get(((s, m), n)), asmG.offs.get(((t, m), n))
            if so is None or to is None:
                continue
            e = ent.setdefault(n, {})
            for i, j, v in eta[s[0]].at(m).entries():
                e[(to + i, so + j)] = v
    comps = {n: Mat.from_dict(ent.get(n, {}), HG.dim(n), HF.dim(n)) for n in HF.dims}
    return ChainMap(HF, HG, comps)


def holim_induced(F: ChainDiagram, G: ChainDiagram, psi, eta, HF=None, HG=None) -> ChainMap:
    """holim F → holim G for monotone psi: G.shape → F.shape and eta_q: F(psi q) → G(q).

    The component at a chain τ of G's shape reads F's component at psi(τ),
    which must be a strict chain; degenerate images contribute zero.
    """
    HF = HF or holim_poset(F)
    HG = HG or holim_poset(G)
    asmF, asmG = _Assembler(), _Assembler()
    for s in F.shape.chains():
        for m, dim in F.objects[s[-1]].dims.items():
            asmF.add((s, m), m - len(s) + 1, dim)
    for t in G.shape.chains():
        for m, dim in G.objects[t[-1]].dims.items():
            asmG.add((t, m), m - len(t) + 1, dim)
    ent = {}
    for t in G.shape.chains():
        s = tuple(psi(x) for x in t)
        if len(set(s)) != len(s):
            continue
        for m in F.objects[s[-1]].dims:
            n = m - len(t) + 1
            so, to = asmF.offs.get(((s, m), n)), asmG.offs.get(((t, m), n))
            if so is None or to is None:
                continue
            e = ent.setdefault(n, {})
            for i, j, v in eta[t[-1]].at(m).entries():
                e[(to + i, so + j)] = v
    comps = {n: Mat.from_dict(ent.get(n, {}), HG.dim(n), HF.dim(n)) for n in HF.dims}
    return ChainMap(HF, HG, comps)


def hocolim_to_colim_top(F: ChainDiagram, top) -> ChainMap:
    """hocolim F → F(top) when `top` is terminal: chains of length 0 map by F(p → top)."""
    H = hocolim_poset(F)
    asm = _Assembler()
    for s in F.shape.chains():
        for m, dim in F.objects[s[0]].dims.items():
            asm.add((s, m), m + len(s) - 1, dim)
    T = F.objects[top]
    ent = {}
    for p in F.shape.labels:
        for m in F.objects[p].dims:
            o = asm.offs.get((((p,), m), m))
            if o is None:
                continue
            e = ent.setdefault(m, {})
            for i, j, v in F.map(p, top).at(m).entries():
                e[(i, o + j)] = v
    comps = {n: Mat.from_dict(ent.get(n, {}), T.dim(n), H.dim(n)) for n in H.dims}
    return ChainMap(H, T, comps)


def holim_from_bottom(F: ChainDiagram, bottom) -> ChainMap:
    """F(bottom) → holim F when `bottom` is initial: the cone of maps F(bottom → p)."""
    H = holim_poset(F)
    asm = _Assembler()
    for s in F.shape.chains():
        for m, dim in F.objects[s[-1]].dims.items():
            asm.add((s, m), m - len(s) + 1, dim)
    B = F.objects[bottom]
    ent = {}
    for p in F.shape.labels:
        for m in F.objects[p].dims:
            o = asm.offs.get((((p,), m), m))
            if o is None:
                continue
            e = ent.setdefault(m, {})
            for i, j, v in F.map(bottom, p).at(m).entries():
                e[(o + i, j)] = v
    comps = {n: Mat.from_dict(ent.get(n, {}), H.dim(n), B.dim(n)) for n in B.dims}
    return ChainMap(B, H, comps)


# samplers -------------------------------------------------------------------

def random_complex(rng, max_total=6, lo=-2, hi=2, num=2) -> ChainComplex:
    """A random bounded complex: random dims, differentials built as products
    through random rank factors so that d∘d = 0 holds exactly."""
    from fractions import Fraction
    total = rng.randint(1, max_total)
    degs = list(range(lo, hi + 1))
    dims = {n: 0 for n in degs}
    for _ in range(total):
        dims[rng.choice(degs)] += 1
    d = {}
    for n in degs:
        src, tgt = dims[n], dims.get(n - 1, 0)
        if n - 1 not in dims or src == 0 or tgt == 0:
            continue
        prev = d.get(n - 1)
        K = prev.nullspace() if prev is not None else Mat.eye(tgt)
        if K.cols == 0:
            d[n] = Mat.zeros(tgt, src)
            continue
        r = rng.randint(0, min(src, K.cols))
        coeffs = Mat.from_rows([[Fraction(rng.randint(-num, num)) for _ in range(src)] for _ in range(K.cols)],
                               m=K.cols, n=src)
        sel = Mat.from_rows([[Fraction(int(i == j and i < r)) for j in range(K.cols)] for i in range(K.cols)],
                            m=K.cols, n=K.cols)
        d[n] = K @ sel @ coeffs
    return ChainComplex(dims, d)


def acyclic_extension(rng, C: ChainComplex, extra=2) -> tuple:
    """C ⊕ (a contractible piece) with the inclusion, a quasi-isomorphism."""
    pieces = []
    for _ in range(extra):
        n = rng.choice(sorted(C.dims) or [0])
        k = rng.randint(1, 2)
        pieces.append(ChainComplex({n: k, n + 1: k}, {n + 1: Mat.eye(k)}))
    S, incs, _ = direct_sum([C] + pieces)
    return S, incs[0]
