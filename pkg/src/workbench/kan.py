"""Strict diagrams of finite-dimensional rational vector spaces over finite posets.

(Co)limits are computed as kernels and cokernels, Kan extensions along
full subposets by the pointwise formula.  On top of that sit the
excisive-approximation constructions C_σ, T_σ, θ and P_σ, the Rezk
factorization, sampled excisiveness checks, the face-transport checks and
the two-step colimit decomposition over a cover.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction

from .lattice import (ExcisableStructure, FinLattice, FinPoset, disjoint_partners, induced_excisable,
                      powerset_lattice, show, singleton_star, smashing_subposet)
from .linalg import Mat, kron


class DiagramError(ValueError):
    pass


class NotStabilized(RuntimeError):
    def __init__(self, trajectory):
        self.trajectory = trajectory
        super().__init__(f"no stabilization; rank trajectory {trajectory}")


class PosetDiagramV:
    """A functor from a finite poset to finite-dimensional Q-vector spaces.

    Edge maps live on covering relations; `map(x, y)` composes along any
    chain.  Functoriality is validated at construction unless `check=False`.
    """

    def __init__(self, shape: FinPoset, dims, edges, check=True):
        self.shape = shape
        self.dims = {x: int(dims.get(x, 0)) for x in shape.labels}
        self.edges = {}
        for a, b in shape.covers:
            m = edges.get((a, b))
            if m is None:
                m = Mat.zeros(self.dims[b], self.dims[a])
            if m.shape != (self.dims[b], self.dims[a]):
                raise DiagramError(f"edge {show(a)}->{show(b)} has shape {m.shape}")
            self.edges[(a, b)] = m
        self._maps = None
        if check:
            w = self.functoriality_witness()
            if w is not None:
                raise DiagramError(f"functoriality fails between {show(w[0])} and {show(w[1])}")

    def _compute_maps(self, strict):
        P = self.shape
        maps = {}
        bad = None
        for x in reversed(P.linear_order):
            maps[(x, x)] = Mat.eye(self.dims[x])
            for y in P.up(x):
                if y == x:
                    continue
                cands = [c for c in P.upper_covers[x] if P.le(c, y)]
                first = maps[(cands[0], y)] @ self.edges[(x, cands[0])]
                if strict and bad is None:
                    for c in cands[1:]:
                        if maps[(c, y)] @ self.edges[(x, c)] != first:
                            bad = (x, y)
                            break
                maps[(x, y)] = first
        return maps, bad

    def functoriality_witness(self):
        maps, bad = self._compute_maps(True)
        self._maps = maps
        return bad

    def map(self, x, y) -> Mat:
        if self._maps is None:
            self._maps, _ = self._compute_maps(False)
        return self._maps[(x, y)]

    def dim(self, x) -> int:
        return self.dims[x]

    def total_dim(self) -> int:
        return sum(self.dims.values())

    def restrict(self, subset) -> "PosetDiagramV":
        sub = self.shape.sub(subset)
        return PosetDiagramV(sub, {x: self.dims[x] for x in sub.labels},
                             {(a, b): self.map(a, b) for a, b in sub.covers}, check=False)

    def reindex(self, f, source: FinPoset) -> "PosetDiagramV":
        """X ∘ f for a monotone f: source → shape."""
        return PosetDiagramV(source, {x: self.dims[f(x)] for x in source.labels},
                             {(a, b): self.map(f(a), f(b)) for a, b in source.covers}, check=False)

    def apply(self, F) -> "PosetDiagramV":
        """Apply a functor edgewise."""
        return PosetDiagramV(self.shape, {x: F.obj(self.dims[x]) for x in self.shape.labels},
                             {(a, b): F.mor(m) for (a, b), m in self.edges.items()}, check=False)

    def to_json(self) -> dict:
        from .lattice import lattice_to_json, label_to_json
        import json as _json
        key = lambda x: _json.dumps(label_to_json(x), sort_keys=True)
        return {"shape": lattice_to_json(self.shape),
                "dims": {key(x): self.dims[x] for x in self.shape.labels},
                "edges": {f"{key(a)}->{key(b)}": m.to_strings() for (a, b), m in self.edges.items()}}

    def __repr__(self):
        return "PosetDiagramV(" + ", ".join(f"{show(x)}:{self.dims[x]}" for x in self.shape.labels) + ")"


def diagram_from_json(obj, shape=None, check=True) -> PosetDiagramV:
    import json as _json
    from .lattice import lattice_from_json, label_from_json
    if shape is None:
        shape = lattice_from_json(obj["shape"], cls=FinPoset)
    parse = lambda s: label_from_json(_json.loads(s))
    dims = {parse(k): v for k, v in obj["dims"].items()}
    edges = {}
    for k, rows in obj["edges"].items():
        a, b = k.split("->")
        m = Mat.from_rows(rows, m=dims[parse(b)], n=dims[parse(a)])
        edges[(parse(a), parse(b))] = m
    return PosetDiagramV(shape, dims, edges, check=check)


# limits and colimits ------------------------------------------------------

@dataclass
class Colim:
    dim: int
    legs: dict  # element -> Mat (dim x D(element))


def _generating_pairs(P: FinPoset, elems):
    """Pairs a < b in `elems` with nothing from `elems` strictly between."""
    return [(a, b) for a in elems for b in elems if a != b and P.le(a, b)
            and not any(c != a and c != b and P.le(a, c) and P.le(c, b) for c in elems)]


def colim_v(D: PosetDiagramV, subset=None) -> Colim:
    """Colimit over `subset` (default: whole shape) as a cokernel."""
    P = D.shape
    elems = [x for x in P.labels if subset is None or x in subset]
    if not elems:
        return Colim(0, {})
    offs, n = {}, 0
    for x in elems:
        offs[x] = n
        n += D.dims[x]
    cols = []
    for a, b in _generating_pairs(P, elems):
        ma = D.map(a, b)
        for j in range(D.dims[a]):
            entries = {(offs[a] + j, 0): -1}
            for i in range(D.dims[b]):
                v = ma[i, j]
                if v:
                    entries[(offs[b] + i, 0)] = v
            cols.append(Mat.from_dict(entries, n, 1))
    Q = Mat.hstack(cols, m=n).cokernel() if cols else Mat.eye(n)
    legs = {x: Q.submatrix(cols=range(offs[x], offs[x] + D.dims[x])) for x in elems}
    return Colim(Q.rows, legs)


@dataclass
class Lim:
    dim: int
    legs: dict  # element -> Mat (D(element) x dim)


def lim_v(D: PosetDiagramV, subset=None) -> Lim:
    P = D.shape
    elems = [x for x in P.labels if subset is None or x in subset]
    if not elems:
        return Lim(0, {})
    offs, n = {}, 0
    for x in elems:
        offs[x] = n
        n += D.dims[x]
    rows = []
    for a, b in _generating_pairs(P, elems):
        ma = D.map(a, b)
        for i in range(D.dims[b]):
            entries = {(0, offs[b] + i): -1}
            for j in range(D.dims[a]):
                v = ma[i, j]
                if v:
                    entries[(0, offs[a] + j)] = v
            rows.append(Mat.from_dict(entries, 1, n))
    A = Mat.vstack(rows, n=n) if rows else Mat.zeros(0, n)
    K = A.nullspace() if A.rows else Mat.eye(n)
    legs = {x: K.submatrix(rows=range(offs[x], offs[x] + D.dims[x])) for x in elems}
    return Lim(K.cols, legs)


def colim_induced(D: PosetDiagramV, small, big, cs: Colim = None, cb: Colim = None) -> Mat:
    """Canonical map colim over `small` → colim over `big` for small ⊆ big."""
    cs = cs or colim_v(D, small)
    cb = cb or colim_v(D, big)
    if cs.dim == 0:
        return Mat.zeros(cb.dim, 0)
    elems = [x for x in D.shape.labels if x in cs.legs]
    Qs = Mat.hstack([cs.legs[x] for x in elems], m=cs.dim)
    Qb = Mat.hstack([cb.legs[x] for x in elems], m=cb.dim)
    return Qb @ Qs.right_inverse()


def lim_induced(D: PosetDiagramV, big, small, lb: Lim = None, ls: Lim = None) -> Mat:
    """Canonical map lim over `big` → lim over `small` for small ⊆ big."""
    lb = lb or lim_v(D, big)
    ls = ls or lim_v(D, small)
    if ls.dim == 0:
        return Mat.zeros(0, lb.dim)
    elems = [x for x in D.shape.labels if x in ls.legs]
    Kb = Mat.vstack([lb.legs[x] for x in elems], n=lb.dim)
    Ks = Mat.vstack([ls.legs[x] for x in elems], n=ls.dim)
    return Ks.left_inverse() @ Kb


def cone_into_lim(lim: Lim, maps: dict, src_dim: int) -> Mat:
    """The map into a limit induced by a cone {x: src → D(x)}."""
    elems = [x for x in maps if x in lim.legs]
    if lim.dim == 0:
        return Mat.zeros(0, src_dim)
    K = Mat.vstack([lim.legs[x] for x in elems], n=lim.dim)
    C = Mat.vstack([maps[x] for x in elems], n=src_dim)
    X = K.solve(C)
    if X is None:
        raise DiagramError("family is not a cone")
    return X


def cocone_from_colim(col: Colim, maps: dict, tgt_dim: int) -> Mat:
    """The map out of a colimit induced by a cocone {x: D(x) → tgt}."""
    elems = [x for x in maps if x in col.legs]
    if col.dim == 0:
        return Mat.zeros(tgt_dim, 0)
    Q = Mat.hstack([col.legs[x] for x in elems], m=col.dim)
    C = Mat.hstack([maps[x] for x in elems], m=tgt_dim)
    X = Q.T.solve(C.T)
    if X is None:
        raise DiagramError("family is not a cocone")
    return X.T


# Kan extensions ---------------------------------------------------------

def lkan(L: FinPoset, sub, F: PosetDiagramV) -> PosetDiagramV:
    """Left Kan extension from the downward-closed `sub` to L."""
    sub = set(sub)
    if not L.is_down_closed(sub):
        raise DiagramError("left Kan extension needs a downward-closed subposet")
    # F lives on the subposet; view it through L's order
    cols = {}
    idx = {}
    for l in L.labels:
        idx[l] = {q for q in sub if L.le(q, l)}
        cols[l] = colim_v(F, idx[l])
    edges = {}
    for a, b in L.covers:
        edges[(a, b)] = colim_induced(F, idx[a], idx[b], cols[a], cols[b])
    out = PosetDiagramV(L, {l: cols[l].dim for l in L.labels}, edges, check=False)
    out.kan_legs = cols
    return out


def rkan(L: FinPoset, sub, F: PosetDiagramV) -> PosetDiagramV:
    """Right Kan extension from the upward-closed `sub` to L."""
    sub = set(sub)
    if not L.is_up_closed(sub):
        raise DiagramError("right Kan extension needs an upward-closed subposet")
    lims = {}
    idx = {}
    for l in L.labels:
        idx[l] = {q for q in sub if L.le(l, q)}
        lims[l] = lim_v(F, idx[l])
    edges = {}
    for a, b in L.covers:
        edges[(a, b)] = lim_induced(F, idx[a], idx[b], lims[a], lims[b])
    out = PosetDiagramV(L, {l: lims[l].dim for l in L.labels}, edges, check=False)
    out.kan_legs = lims
    return out


def punctured_bottom(L: FinLattice):
    return [x for x in L.labels if x != L.bottom]


def counit_maps(X: PosetDiagramV, sub):
    """Components of σ_!σ^*X → X."""
    L = X.shape
    F = X.restrict(sub)
    ext = lkan(L, sub, F)
    comps = {}
    for l in L.labels:
        col = ext.kan_legs[l]
        comps[l] = cocone_from_colim(col, {q: X.map(q, l) for q in col.legs}, X.dims[l])
    return ext, comps


def unit_maps(X: PosetDiagramV, sub):
    """Components of X → τ_*τ^*X for an upward-closed τ."""
    L = X.shape
    F = X.restrict(sub)
    ext = rkan(L, sub, F)
    comps = {}
    for l in L.labels:
        lm = ext.kan_legs[l]
        comps[l] = cone_into_lim(lm, {q: X.map(l, q) for q in lm.legs}, X.dims[l])
    return ext, comps


def _relation_rank(D: PosetDiagramV, elems) -> int:
    """Rank of the relation matrix whose cokernel is the colimit over `elems`."""
    offs, n = {}, 0
    for x in elems:
        offs[x] = n
        n += D.dims[x]
    blocks = []
    for a, b in _generating_pairs(D.shape, elems):
        if D.dims[a] == 0:
            continue
        ent = {}
        for j in range(D.dims[a]):
            ent[(offs[a] + j, j)] = -1
        for i, j, v in D.map(a, b).entries():
            ent[(offs[b] + i, j)] = v
        blocks.append(Mat.from_dict(ent, n, D.dims[a]))
    return (n, Mat.hstack(blocks, m=n).rank() if blocks else 0)


def cocartesian_witness(X: PosetDiagramV, sigma):
    """First element where the counit fails to be invertible, with (rank, source dim, target dim).

    The counit is the identity on σ; elsewhere it is invertible iff the colimit
    over σ below ℓ has the dimension of X(ℓ) and the legs jointly span X(ℓ).
    """
    sub = sigma.subset if isinstance(sigma, ExcisableStructure) else set(sigma)
    L = X.shape
    for l in L.linear_order:
        if l in sub:
            continue
        below = [q for q in L.labels if q in sub and L.le(q, l)]
        n, r = _relation_rank(X, below)
        tgt = X.dims[l]
        span = Mat.hstack([X.map(q, l) for q in below], m=tgt).rank() if below else 0
        if n - r != tgt or span != tgt:
            return (l, span, n - r, tgt)
    return None


def is_cocartesian(X: PosetDiagramV, sigma) -> bool:
    return cocartesian_witness(X, sigma) is None


def _lim_dim(D: PosetDiagramV, elems) -> int:
    """Dimension of the limit over `elems`, from the rank of its defining relations."""
    offs, n = {}, 0
    for x in elems:
        offs[x] = n
        n += D.dims[x]
    blocks = []
    for a, b in _generating_pairs(D.shape, elems):
        if D.dims[b] == 0:
            continue
        ent = {}
        for i in range(D.dims[b]):
            ent[(i, offs[b] + i)] = -1
        for i, j, v in D.map(a, b).entries():
            ent[(i, offs[a] + j)] = v
        blocks.append(Mat.from_dict(ent, D.dims[b], n))
    return n - (Mat.vstack(blocks, n=n).rank() if blocks else 0)


def cartesian_witness(X: PosetDiagramV):
    """None if X(∅) → lim over the punctured shape is invertible, else (∅, rank, dims).

    Only the ∅ component of the unit can fail: every other element is initial
    in its own up-set.
    """
    L = X.shape
    bot = L.bottom
    punct = punctured_bottom(L)
    src = X.dims[bot]
    ldim = _lim_dim(X, punct)
    inj = Mat.vstack([X.map(bot, l) for l in punct], n=src).rank() if punct else 0
    if ldim != src or inj != src:
        return (bot, inj, src, ldim)
    return None


def is_cartesian(X: PosetDiagramV) -> bool:
    return cartesian_witness(X) is None


# functors on finite-dimensional vector spaces -------------------------------

class FunctorSpec:
    kind = "abstract"

    def obj(self, n: int) -> int:
        raise NotImplementedError

    def mor(self, m: Mat) -> Mat:
        raise NotImplementedError

    def preserves_zero(self) -> bool:
        return self.obj(0) == 0

    def __repr__(self):
        return self.kind


class Constant(FunctorSpec):
    def __init__(self, dim):
        self.dim = dim
        self.kind = f"constant({dim})"

    def obj(self, n):
        return self.dim

    def mor(self, m):
        return Mat.eye(self.dim)


class Identity(FunctorSpec):
    kind = "identity"

    def obj(self, n):
        return n

    def mor(self, m):
        return m


class DirectSumPower(FunctorSpec):
    def __init__(self, k):
        self.k = k
        self.kind = f"direct-sum-power({k})"

    def obj(self, n):
        return self.k * n

    def mor(self, m):
        return Mat.block_diag([m] * self.k) if self.k else Mat.zeros(0, 0)


class TensorPower(FunctorSpec):
    def __init__(self, k):
        self.k = k
        self.kind = f"tensor-power({k})"

    def obj(self, n):
        return n ** self.k

    def mor(self, m):
        out = Mat.eye(1)
        for _ in range(self.k):
            out = kron(out, m)
        return out


def _sym2_data(n):
    pairs = [(i, j) for i in range(n) for j in range(i, n)]
    pos = {p: k for k, p in enumerate(pairs)}
    proj = {}
    incl = {}
    for i in range(n):
        for j in range(n):
            proj[(pos[(min(i, j), max(i, j))], i * n + j)] = 1
    for k, (i, j) in enumerate(pairs):
        if i == j:
            incl[(i * n + j, k)] = 1
        else:
            incl[(i * n + j, k)] = Fraction(1, 2)
            incl[(j * n + i, k)] = Fraction(1, 2)
    return (Mat.from_dict(proj, len(pairs), n * n), Mat.from_dict(incl, n * n, len(pairs)))


class SymmetricSquare(FunctorSpec):
    kind = "symmetric-square"

    def obj(self, n):
        return n * (n + 1) // 2

    def mor(self, m):
        P, _ = _sym2_data(m.rows)
        _, S = _sym2_data(m.cols)
        return P @ kron(m, m) @ S


class Composite(FunctorSpec):
    """parts[0] ∘ parts[1] ∘ ... (the last one is applied first)."""

    def __init__(self, parts):
        self.parts = list(parts)
        self.kind = "composite(" + ", ".join(p.kind for p in self.parts) + ")"

    def obj(self, n):
        for p in reversed(self.parts):
            n = p.obj(n)
        return n

    def mor(self, m):
        for p in reversed(self.parts):
            m = p.mor(m)
        return m


def functor_from_spec(spec) -> FunctorSpec:
    """Parse 'identity', 'constant:2', 'sum:3', 'tensor:2', 'sym2', 'a∘b' style specs."""
    if isinstance(spec, FunctorSpec):
        return spec
    spec = spec.strip()
    if "∘" in spec or "." in spec:
        return Composite([functor_from_spec(p) for p in spec.replace(".", "∘").split("∘")])
    name, _, arg = spec.partition(":")
    if name == "identity":
        return Identity()
    if name == "constant":
        return Constant(int(arg or 1))
    if name == "sum":
        return DirectSumPower(int(arg or 2))
    if name == "tensor":
        return TensorPower(int(arg or 2))
    if name == "sym2":
        return SymmetricSquare()
    raise DiagramError(f"unknown functor {spec!r}")


# excisive approximation -------------------------------------------------------

def c_sigma_values(L: FinLattice, sigma: ExcisableStructure):
    """Elements where C_σ(X) equals X: those with no nonzero σ-element below them."""
    return {l for l in L.labels if all(q == L.bottom for q in sigma.subset if L.le(q, l))}


def c_sigma(X_dim: int, L: FinLattice, sigma: ExcisableStructure) -> PosetDiagramV:
    sub = sigma.subset
    F = PosetDiagramV(L.sub(sub), {L.bottom: X_dim}, {}, check=False)
    out = lkan(L, sub, F)
    assert is_cocartesian(out, sigma)
    return out


def c_sigma_map(m: Mat, L: FinLattice, sigma: ExcisableStructure) -> dict:
    """C_σ on a linear map: m where the value is X, zero elsewhere."""
    live = c_sigma_values(L, sigma)
    return {l: (m if l in live else Mat.zeros(0, 0)) for l in L.labels}


class TSigma(FunctorSpec):
    """T_σF(X) = lim over L∖{∅} of F ∘ C_σ(X)."""

    def __init__(self, F: FunctorSpec, L: FinLattice, sigma: ExcisableStructure):
        self.F = F
        self.L = L
        self.sigma = sigma
        self.kind = f"T({F.kind})"
        self.live = c_sigma_values(L, sigma)
        self.punct = punctured_bottom(L)
        self._cache = {}
        self._mor_cache = {}

    def _diag(self, n):
        """F applied edgewise to C_σ(Q^n), with the limit over the punctured shape."""
        if n not in self._cache:
            L, F = self.L, self.F
            dims = {l: F.obj(n if l in self.live else 0) for l in L.labels}
            edges = {}
            for a, b in L.covers:
                if a in self.live and b in self.live:
                    edges[(a, b)] = F.mor(Mat.eye(n))
                elif a in self.live:
                    edges[(a, b)] = F.mor(Mat.zeros(0, n))
                else:
                    edges[(a, b)] = F.mor(Mat.zeros(0, 0))
            D = PosetDiagramV(L, dims, edges, check=False)
            self._cache[n] = (D, lim_v(D, self.punct))
        return self._cache[n]

    def obj(self, n):
        return self._diag(n)[1].dim

    def mor(self, m):
        # memoized: iterating T_σ would otherwise recompute every lower stage once per leg
        key = (m.shape, m)
        if key not in self._mor_cache:
            Ds, ls = self._diag(m.cols)
            Dt, lt = self._diag(m.rows)
            comps = {}
            for l in self.punct:
                comp = self.F.mor(m if l in self.live else Mat.zeros(0, 0))
                comps[l] = comp @ ls.legs[l]
            self._mor_cache[key] = cone_into_lim(lt, comps, ls.dim)
        return self._mor_cache[key]

    def theta(self, n) -> Mat:
        """θ: F(Q^n) → T_σF(Q^n)."""
        D, lm = self._diag(n)
        return cone_into_lim(lm, {l: D.map(self.L.bottom, l) for l in self.punct}, self.F.obj(n))


def t_sigma(F, L, sigma, n) -> int:
    return TSigma(F, L, sigma).obj(n)


def theta(F, L, sigma, n) -> Mat:
    return TSigma(F, L, sigma).theta(n)


@dataclass
class PSigmaResult:
    dim: int
    stage: int
    trajectory: list


def p_sigma(F: FunctorSpec, L: FinLattice, sigma: ExcisableStructure, n: int, max_stage: int = 8) -> PSigmaResult:
    """Follow F → T F → T²F → ... at Q^n until the connecting θ maps stay invertible."""
    if max_stage < 1:
        raise ValueError("stage cap must be at least 1")
    stages = [F]
    for _ in range(max_stage + 1):
        stages.append(TSigma(stages[-1], L, sigma))
    traj = [stages[0].obj(n)]
    iso = []
    for k in range(max_stage + 1):
        th = stages[k + 1].theta(n)
        traj.append(stages[k + 1].obj(n))
        iso.append(th.is_invertible())
    for k in range(max_stage):
        if all(iso[k:max_stage + 1]):
            return PSigmaResult(traj[k], k, traj)
    raise NotStabilized(traj)


# Rezk factorization -----------------------------------------------------------

@dataclass
class RezkFactorization:
    E: PosetDiagramV
    to_E: dict      # x -> F D(x) → E(x)
    from_E: dict    # x -> E(x) → T_σF(D(x))
    theta: dict     # x -> θ at D(x)
    cartesian: bool
    composite_ok: bool


def _lkan_natural(L, sub, F1: PosetDiagramV, F2: PosetDiagramV, eta: dict, e1=None, e2=None):
    """σ_! of a natural transformation F1 → F2 of diagrams on `sub`."""
    e1 = e1 or lkan(L, sub, F1)
    e2 = e2 or lkan(L, sub, F2)
    out = {}
    for l in L.labels:
        c1, c2 = e1.kan_legs[l], e2.kan_legs[l]
        out[l] = cocone_from_colim(c1, {q: c2.legs[q] @ eta[q] for q in c1.legs}, c2.dim)
    return out


def rezk_factorization(F: FunctorSpec, L: FinLattice, sigma: ExcisableStructure, D: PosetDiagramV) -> RezkFactorization:
    if not is_cocartesian(D, sigma):
        raise DiagramError("input diagram is not σ-cocartesian")
    punct = punctured_bottom(L)
    T = TSigma(F, L, sigma)
    sub = sigma.subset
    E_lims = {}
    E_diags = {}
    to_E, from_E, thetas = {}, {}, {}
    ok = True
    for x in L.labels:
        shifted = D.reindex(lambda l, x=x: L.join(x, l), L)
        FS = shifted.apply(F)
        lm = lim_v(FS, punct)
        E_diags[x], E_lims[x] = FS, lm
        to_E[x] = cone_into_lim(lm, {l: F.mor(D.map(x, L.join(x, l))) for l in punct}, F.obj(D.dims[x]))
        # g_x: (x∨−)^*D → C_σ(D(x)), extended from (id at ∅, 0 elsewhere)
        n = D.dims[x]
        restricted = shifted.restrict(sub)
        target = PosetDiagramV(L.sub(sub), {L.bottom: n}, {}, check=False)
        eta = {q: (Mat.eye(n) if q == L.bottom else Mat.zeros(0, shifted.dims[q])) for q in sub}
        e1 = lkan(L, sub, restricted)
        ext = _lkan_natural(L, sub, restricted, target, eta, e1=e1)
        counit = {l: cocone_from_colim(e1.kan_legs[l], {q: shifted.map(q, l) for q in e1.kan_legs[l].legs},
                                       shifted.dims[l]) for l in L.labels}
        g = {l: ext[l] @ counit[l].inverse() for l in L.labels}
        Dt, lt = T._diag(n)
        from_E[x] = cone_into_lim(lt, {l: F.mor(g[l]) @ lm.legs[l] for l in punct}, lm.dim)
        thetas[x] = T.theta(n)
        if from_E[x] @ to_E[x] != thetas[x]:
            ok = False
    edges = {}
    for a, b in L.covers:
        comps = {l: F.mor(D.map(L.join(a, l), L.join(b, l))) @ E_lims[a].legs[l] for l in punct}
        edges[(a, b)] = cone_into_lim(E_lims[b], comps, E_lims[a].dim)
    E = PosetDiagramV(L, {x: E_lims[x].dim for x in L.labels}, edges)
    return RezkFactorization(E, to_E, from_E, thetas, is_cartesian(E), ok)


# sampling -----------------------------------------------------------------

def random_matrix(rng: random.Random, m: int, n: int, num=3, injective=False) -> Mat:
    for _ in range(50):
        rows = [[Fraction(rng.randint(-num, num), rng.choice([1, 1, 1, 2, 3])) for _ in range(n)] for _ in range(m)]
        M = Mat.from_rows(rows, m=m, n=n)
        if not injective or M.rank() == n:
            return M
    raise DiagramError("could not sample an injective matrix")


def random_invertible(rng: random.Random, n: int, ops=None) -> Mat:
    """A permutation followed by a few elementary row operations with small integer entries.

    Dense random changes of basis make exact elimination slow on larger cubes.
    """
    perm = list(range(n))
    rng.shuffle(perm)
    rows = [[Fraction(1) if perm[i] == j else Fraction(0) for j in range(n)] for i in range(n)]
    for _ in range(ops if ops is not None else 2 * n):
        if n < 2:
            break
        i, k = rng.sample(range(n), 2)
        c = rng.choice((-2, -1, 1, 2))
        rows[i] = [a + c * b for a, b in zip(rows[i], rows[k])]
    if n == 1:
        rows[0][0] *= rng.choice((1, -1, 2, Fraction(1, 2)))
    return Mat.from_rows(rows, m=n, n=n)


SAMPLE_MODES = ("any", "injective", "jointly-injective")


def random_cocartesian(rng: random.Random, L: FinLattice, sigma: ExcisableStructure, max_dim=3,
                       mode="any") -> PosetDiagramV:
    """Random diagram on L^σ, left Kan extended to L.

    mode "injective" makes every map injective; "jointly-injective" only asks
    that the maps out of ∅ have no common kernel.  Shapes where independent
    edge choices are not functorial fall back to a free diagram.
    """
    if mode not in SAMPLE_MODES:
        raise ValueError(f"unknown sampling mode {mode!r}")
    P = L.sub(sigma.subset)
    bot = L.bottom
    for _ in range(100):
        dims = {q: rng.randint(1 if q == bot else 0, max_dim) for q in P.labels}
        if mode == "injective":
            for q in P.linear_order:
                dims[q] = max([dims[q]] + [dims[p] for p in P.down(q)])
        edges = {(a, b): random_matrix(rng, dims[b], dims[a], injective=(mode == "injective"))
                 for a, b in P.covers}
        F = PosetDiagramV(P, dims, edges, check=False)
        if F.functoriality_witness() is not None:
            F = _free_diagram(rng, P, max_dim)
        if mode == "jointly-injective":
            up = [q for q in P.labels if q != bot]
            if up and Mat.vstack([F.map(bot, q) for q in up], n=F.dims[bot]).rank() != F.dims[bot]:
                continue
        return lkan(L, sigma.subset, F)
    raise DiagramError("sampler exhausted its retries")


def _free_diagram(rng, P: FinPoset, max_dim):
    """D(q) = ⊕_{p ≤ q} G(p) with inclusions, then a random automorphism per element."""
    gens = {p: rng.randint(0, max_dim) for p in P.labels}
    offs = {}
    for q in P.labels:
        o, acc = {}, 0
        for p in P.linear_order:
            if P.le(p, q):
                o[p] = acc
                acc += gens[p]
        offs[q] = (o, acc)
    edges = {}
    for a, b in P.covers:
        oa, na = offs[a]
        ob, nb = offs[b]
        ent = {}
        for p, off in oa.items():
            for k in range(gens[p]):
                ent[(ob[p] + k, off + k)] = 1
        edges[(a, b)] = Mat.from_dict(ent, nb, na)
    return PosetDiagramV(P, {q: offs[q][1] for q in P.labels}, edges)


def random_diagram(rng: random.Random, L: FinPoset, max_dim=3) -> PosetDiagramV:
    """A random functorial diagram: a free diagram followed by a random quotient at the top part."""
    base = _free_diagram(rng, L, max_dim)
    # twist each value by a random invertible change of basis
    changes = {}
    for x in L.labels:
        changes[x] = random_invertible(rng, base.dims[x])
    edges = {(a, b): changes[b] @ base.edges[(a, b)] @ changes[a].inverse() for a, b in L.covers}
    D = PosetDiagramV(L, base.dims, edges, check=False)
    # random cokernel at a random element, pushed upward, keeps functoriality
    return D


def random_general_diagram(rng: random.Random, L: FinPoset, max_dim=3) -> PosetDiagramV:
    """Random diagram with non-injective maps: compose a free diagram with random projections
    that are applied uniformly (a natural quotient), which keeps functoriality."""
    D = random_diagram(rng, L, max_dim)
    # kill a random subspace of the generator at a random element and everything it maps to
    x = rng.choice(L.labels)
    if D.dims[x] == 0:
        return D
    v = random_matrix(rng, D.dims[x], 1)
    sub = {}
    for y in L.up(x):
        sub[y] = D.map(x, y) @ v
    dims, edges, projs = {}, {}, {}
    for y in L.labels:
        if y in sub and not sub[y].is_zero():
            Q = sub[y].cokernel()
        else:
            Q = Mat.eye(D.dims[y])
        projs[y] = Q
        dims[y] = Q.rows
    for a, b in L.covers:
        edges[(a, b)] = projs[b] @ D.edges[(a, b)] @ projs[a].right_inverse()
    return PosetDiagramV(L, dims, edges)


# excisiveness ---------------------------------------------------------------

@dataclass
class ExcisiveReport:
    functor: str
    samples: int
    passed: int
    witness: object = None
    seed: int | None = None

    @property
    def ok(self):
        return self.passed == self.samples


def check_excisive(F: FunctorSpec, L: FinLattice, sigma: ExcisableStructure, samples=20, seed=0,
                   max_dim=2, mode="injective") -> ExcisiveReport:
    rng = random.Random(seed)
    passed = 0
    witness = None
    for _ in range(samples):
        X = random_cocartesian(rng, L, sigma, max_dim=max_dim, mode=mode)
        FX = X.apply(F)
        w = cartesian_witness(FX)
        if w is None:
            passed += 1
        elif witness is None or X.total_dim() < witness[0].total_dim():
            witness = (X, w)
    return ExcisiveReport(F.kind, samples, passed, witness, seed)


# face transport ---------------------------------------------------------------

def shift_diagram(X: PosetDiagramV, L: FinLattice, x) -> PosetDiagramV:
    """X ∘ (x∨−)."""
    return X.reindex(lambda l: L.join(x, l), L)


def face_diagram(X: PosetDiagramV, L: FinLattice, a, d) -> PosetDiagramV:
    """X ∘ Φ for the face y ↦ d∨y on L_a."""
    La = smashing_subposet(L, a)
    return X.reindex(lambda y: L.join(d, y), La)


@dataclass
class FaceReport:
    checks: dict = field(default_factory=dict)   # name -> [passed, total]
    witnesses: dict = field(default_factory=dict)

    def record(self, name, ok, witness=None):
        c = self.checks.setdefault(name, [0, 0])
        c[1] += 1
        if ok:
            c[0] += 1
        elif name not in self.witnesses:
            self.witnesses[name] = witness

    @property
    def ok(self):
        return all(p == t for p, t in self.checks.values())

    def merge(self, other: "FaceReport"):
        for k, (p, t) in other.checks.items():
            c = self.checks.setdefault(k, [0, 0])
            c[0] += p
            c[1] += t
        for k, w in other.witnesses.items():
            self.witnesses.setdefault(k, w)


def face_transport_check(X: PosetDiagramV, L: FinLattice, sigma: ExcisableStructure, a=None,
                         functors=(), report=None) -> FaceReport:
    """Checks the transport statements on one diagram.

    shift-cocartesian: σ-cocartesian X stays σ-cocartesian after x∨−.
    shift-cartesian: X∘(x∨−) is cartesian for x ≠ ∅.
    face-cocartesian: a-faces of a σ-cocartesian X are σ_a-cocartesian.
    faces-cartesian: cartesian a-faces for all d force X cartesian.
    face-excisive: F cartesian on all a-faces of a σ-cocartesian X forces FX cartesian.
    """
    rep = report or FaceReport()
    cocart = is_cocartesian(X, sigma)
    for x in L.labels:
        Y = shift_diagram(X, L, x)
        if cocart:
            rep.record("shift-cocartesian", is_cocartesian(Y, sigma), (x,))
        if x != L.bottom:
            rep.record("shift-cartesian", is_cartesian(Y), (x,))
    alist = [a] if a is not None else list(L.labels)
    for a_ in alist:
        sig_a = induced_excisable(L, sigma, a_)
        faces = [(d, face_diagram(X, L, a_, d)) for d in disjoint_partners(L, a_)]
        if cocart:
            for d, Fd in faces:
                rep.record("face-cocartesian", is_cocartesian(Fd, sig_a), (a_, d))
        if all(is_cartesian(Fd) for _, Fd in faces):
            rep.record("faces-cartesian", is_cartesian(X), (a_,))
        for F in functors:
            if cocart and all(is_cartesian(Fd.apply(F)) for _, Fd in faces):
                rep.record("face-excisive", is_cartesian(X.apply(F)), (a_, F.kind))
    return rep


def zero_out_of_bottom(X: PosetDiagramV, L: FinLattice) -> PosetDiagramV:
    """Mutation: every map leaving ∅ becomes zero (still a functor)."""
    edges = dict(X.edges)
    for (a, b), m in X.edges.items():
        if a == L.bottom:
            edges[(a, b)] = Mat.zeros(*m.shape)
    return PosetDiagramV(L, X.dims, edges, check=False)


def scale_one_edge(X: PosetDiagramV, edge, c=2) -> PosetDiagramV:
    """Mutation: scale a single cover map; usually breaks functoriality."""
    edges = dict(X.edges)
    edges[edge] = edges[edge].scale(c)
    return PosetDiagramV(X.shape, X.dims, edges, check=False)


# two-step colimits over a cover -------------------------------------------------

class CoverError(ValueError):
    pass


@dataclass
class Cover:
    J: FinPoset
    pieces: dict   # j -> frozenset of elements of the shape

    def validate(self, shape: FinPoset):
        J = self.J
        for a, b in J.covers:
            if not self.pieces[a] <= self.pieces[b]:
                raise CoverError(f"piece {show(a)} not contained in piece {show(b)}")
        union = set().union(*self.pieces.values())
        if union != set(shape.labels):
            raise CoverError("pieces do not cover the shape")
        for a, b in shape.covers:
            if not any(a in P and b in P for P in self.pieces.values()):
                raise CoverError(f"relation {show(a)} < {show(b)} lies in no piece")
        for x in shape.labels:
            Jx = [j for j in J.labels if x in self.pieces[j]]
            if not J.sub(Jx).is_connected():
                raise CoverError(f"pieces containing {show(x)} are not connected in J")


@dataclass
class DecompositionComparison:
    direct: int
    decomposed: int
    iso: bool


def appendix_colim_decomposition(cover: Cover, D: PosetDiagramV) -> DecompositionComparison:
    cover.validate(D.shape)
    J = cover.J
    direct = colim_v(D)
    per = {j: colim_v(D, cover.pieces[j]) for j in J.labels}
    edges = {(a, b): colim_induced(D, cover.pieces[a], cover.pieces[b], per[a], per[b]) for a, b in J.covers}
    C = PosetDiagramV(J, {j: per[j].dim for j in J.labels}, edges, check=False)
    outer = colim_v(C)
    # canonical comparison colim_J colim_{I_j} D → colim_I D
    legs = {}
    for j in J.labels:
        legs[j] = cocone_from_colim(per[j], {x: direct.legs[x] for x in per[j].legs}, direct.dim)
    comp = cocone_from_colim(outer, legs, direct.dim)
    return DecompositionComparison(direct.dim, outer.dim, comp.is_invertible())


def meet_closed_cover(rng: random.Random, shape: FinPoset, L: FinLattice | None = None, extra=2) -> Cover:
    """Random cover by down-sets of a meet-closed family of generators containing the maximal elements."""
    gens = set(shape.maximal())
    others = [x for x in shape.labels if x not in gens]
    rng.shuffle(others)
    gens.update(others[:extra])
    changed = True
    while changed and L is not None:
        changed = False
        for a in list(gens):
            for b in list(gens):
                m = L.meet(a, b)
                if m in shape.index and m not in gens:
                    gens.add(m)
                    changed = True
    J = shape.sub(gens)
    pieces = {j: frozenset(y for y in shape.labels if shape.le(y, j)) for j in J.labels}
    return Cover(J, pieces)


def punctured_cube_slice_cover(m: int, n: int) -> tuple:
    """The cover of the punctured (m+n)-cube by Q(a, ε) = cube_m/a × (cube_n∖𝟙 if ε = 0 else cube_n),
    indexed by the punctured (m+1)-cube.  Coordinates 1..m belong to u, m+1..m+n to w."""
    big = powerset_lattice(m + n)
    shape = big.sub([x for x in big.labels if x != big.top])
    U = frozenset(range(1, m + 1))
    Wc = frozenset(range(m + 1, m + n + 1))
    idx_lat = powerset_lattice(m + 1)
    eps = m + 1
    J = idx_lat.sub([x for x in idx_lat.labels if x != idx_lat.top])
    pieces = {}
    for j in J.labels:
        a = frozenset(k for k in j if k <= m)
        full_w = eps in j
        pieces[j] = frozenset(y for y in shape.labels
                              if (y & U) <= a and (full_w or (y & Wc) != Wc))
    return shape, Cover(J, pieces)


# semiadditivity -------------------------------------------------------------

@dataclass
class SemiadditiveReport:
    pushout: bool
    comparison_iso: bool
    dims: tuple   # (dim F(X⊕Y), dim F(X) + dim F(Y))


def semiadditive_square_check(x: int, y: int, F: FunctorSpec = None) -> SemiadditiveReport:
    """The square (X⊕Y → X, Y → 0) is a pushout; compare F(X⊕Y) with F(X)×F(Y)."""
    F = F or Identity()
    L = powerset_lattice(2)
    e, a, b, t = L.labels
    px = Mat.hstack([Mat.eye(x), Mat.zeros(x, y)], m=x)
    py = Mat.hstack([Mat.zeros(y, x), Mat.eye(y)], m=y)
    sq = PosetDiagramV(L, {e: x + y, a: x, b: y, t: 0}, {(e, a): px, (e, b): py})
    pushout = is_cocartesian(sq, singleton_star(L))
    comp = Mat.vstack([F.mor(px), F.mor(py)], n=F.obj(x + y))
    return SemiadditiveReport(pushout, comp.is_invertible(), (F.obj(x + y), F.obj(x) + F.obj(y)))


def random_downset_shape(rng: random.Random, n: int, gens=3) -> tuple:
    """The down-closure of a few random subsets of {1..n}, with its ambient powerset."""
    L = powerset_lattice(n)
    picks = rng.sample(list(L.labels), k=min(gens, len(L.labels)))
    elems = {y for p in picks for y in L.down(p)}
    return L, L.sub(elems)


def span_cover_of_punctured_square() -> tuple:
    L = powerset_lattice(2)
    e, a, b, _ = L.labels
    shape = L.sub([e, a, b])
    J = FinPoset(["0", "a", "b"], [("0", "0"), ("a", "a"), ("b", "b"), ("0", "a"), ("0", "b")])
    return shape, Cover(J, {"0": frozenset([e]), "a": frozenset([e, a]), "b": frozenset([e, b])})
