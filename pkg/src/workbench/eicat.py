"""Homotopy (co)limits over finite EI categories with rational coefficients.

The nerve of a category with non-identity automorphisms is infinite, so the
poset replacement does not apply.  Instead the constant module Q is resolved
by projectives P_x ⊗_{Aut x} W_x (W_x an Aut-stable complement of the radical
at x, found by averaging a projection), and

    holim F   = Tot Hom_C(P_•, F)
    hocolim F = Tot (R_• ⊗_C F)

where R_• resolves the constant contravariant module.  Signs follow the same
rule as in `chains`: D = d_int + (-1)^m ∂ with m the internal degree.
"""

from __future__ import annotations

from fractions import Fraction

from .chains import ChainComplex, ChainMap, _Assembler
from .linalg import Mat


class EIError(ValueError):
    pass


class Cat:
    """Minimal finite-category interface: objects 0..n-1, morphism ids with src/tgt, comp[(g, f)] = g∘f."""

    def __init__(self, n_objects, src, tgt, comp, identities):
        self.n = n_objects
        self.src = list(src)
        self.tgt = list(tgt)
        self.comp = comp
        self.identities = list(identities)
        self.hom = {}
        for k in range(len(self.src)):
            self.hom.setdefault((self.src[k], self.tgt[k]), []).append(k)
        self._iso = {}

    @classmethod
    def from_fincat(cls, C):
        n = len(C.objects)
        return cls(n, [m[0] for m in C.morphisms], [m[1] for m in C.morphisms], C.comp, C.identities)

    def op(self) -> "Cat":
        comp = {(f, g): h for (g, f), h in self.comp.items()}
        return Cat(self.n, self.tgt, self.src, comp, self.identities)

    def hom_ids(self, s, t):
        return self.hom.get((s, t), [])

    def is_iso(self, f) -> bool:
        if f not in self._iso:
            s, t = self.src[f], self.tgt[f]
            self._iso[f] = any(self.comp[(g, f)] == self.identities[s] and self.comp[(f, g)] == self.identities[t]
                               for g in self.hom_ids(t, s))
        return self._iso[f]

    def aut(self, x):
        return self.hom_ids(x, x)

    def check_ei(self):
        for x in range(self.n):
            for f in self.aut(x):
                if not self.is_iso(f):
                    raise EIError(f"non-invertible endomorphism at object {x}")

    def iso_reps(self):
        reps = []
        for x in range(self.n):
            if not any(any(self.is_iso(f) for f in self.hom_ids(r, x)) for r in reps):
                reps.append(x)
        return reps


class Module:
    """Covariant functor to finite-dimensional Q-vector spaces."""

    def __init__(self, C: Cat, dims, act):
        self.C = C
        self.dims = list(dims)
        self.act = dict(act)   # morphism id -> Mat

    @classmethod
    def constant(cls, C: Cat):
        return cls(C, [1] * C.n, {f: Mat.eye(1) for f in range(len(C.src))})

    def is_zero(self):
        return not any(self.dims)


class _Stage:
    """One projective P = ⊕_g P_{x_g} ⊗_{Aut} W_g covering a module M."""

    def __init__(self, C: Cat, M: Module):
        self.C = C
        self.M = M
        self.gens = []   # (x, Wbasis in M(x) coords, {a: rho(a)})
        for x in C.iso_reps():
            if M.dims[x] == 0:
                continue
            auts = C.aut(x)
            into = [f for y in range(C.n) for f in C.hom_ids(y, x) if not C.is_iso(f)]
            rad = Mat.hstack([M.act[f] for f in into], m=M.dims[x]).colspace() if into else Mat.zeros(M.dims[x], 0)
            if rad.cols == M.dims[x]:
                continue
            W = _equivariant_complement(rad, [M.act[a] for a in auts], M.dims[x])
            rho = {a: W.left_inverse() @ M.act[a] @ W for a in auts}
            self.gens.append((x, W, rho))
        # free coordinates at each object z: (g, f, j) for f: x_g → z
        self.free = {}
        self.q = {}
        self.qr = {}
        for z in range(C.n):
            coords = [(gi, f, j) for gi, (x, W, _) in enumerate(self.gens)
                      for f in C.hom_ids(x, z) for j in range(W.cols)]
            pos = {c: k for k, c in enumerate(coords)}
            rels = []
            for gi, (x, W, rho) in enumerate(self.gens):
                for f in C.hom_ids(x, z):
                    for a in C.aut(x):
                        fa = C.comp[(f, a)]
                        for j in range(W.cols):
                            ent = {(pos[(gi, fa, j)], 0): 1}
                            for i in range(W.cols):
                                v = rho[a][i, j]
                                if v:
                                    key = (pos[(gi, f, i)], 0)
                                    ent[key] = ent.get(key, 0) - v
                            rels.append(Mat.from_dict({k: v for k, v in ent.items() if v}, len(coords), 1))
            R = Mat.hstack(rels, m=len(coords)) if rels else Mat.zeros(len(coords), 0)
            q = R.cokernel() if R.cols and not R.is_zero() else Mat.eye(len(coords))
            self.free[z] = (coords, pos)
            self.q[z] = q
            self.qr[z] = q.right_inverse() if q.rows else Mat.zeros(len(coords), 0)
        self.dims = [self.q[z].rows for z in range(C.n)]
        self._act = {}
        self._eps = {}

    def act(self, h) -> Mat:
        """P(h) in quotient coordinates."""
        if h not in self._act:
            C = self.C
            s, t = C.src[h], C.tgt[h]
            cs, _ = self.free[s]
            _, pt = self.free[t]
            ent = {(pt[(g, C.comp[(h, f)], j)], k): 1 for k, (g, f, j) in enumerate(cs)}
            L = Mat.from_dict(ent, len(pt), len(cs))
            self._act[h] = self.q[t] @ L @ self.qr[s]
        return self._act[h]

    def free_eval(self, z, B_act, psi) -> Mat:
        """Matrix on free coordinates at z of the transformation determined by psi[g]: W_g → B(x_g)."""
        cols = []
        coords, _ = self.free[z]
        for g, f, j in coords:
            cols.append(B_act(f) @ psi[g].submatrix(cols=[j]))
        return cols

    def eps(self, z) -> Mat:
        """P(z) → M(z)."""
        if z not in self._eps:
            coords, _ = self.free[z]
            cols = [self.M.act[f] @ self.gens[g][1].submatrix(cols=[j]) for g, f, j in coords]
            E = Mat.hstack(cols, m=self.M.dims[z]) if cols else Mat.zeros(self.M.dims[z], 0)
            self._eps[z] = E @ self.qr[z]
        return self._eps[z]

    def kernel(self) -> tuple:
        """(K as a Module, {z: basis of K(z) in P(z) coords})."""
        bases = {}
        for z in range(self.C.n):
            E = self.eps(z)
            if E.rank() != self.M.dims[z]:
                raise EIError("projective cover is not surjective")
            bases[z] = E.nullspace() if self.dims[z] else Mat.zeros(0, 0)
        act = {}
        for h in range(len(self.C.src)):
            s, t = self.C.src[h], self.C.tgt[h]
            Kt = bases[t]
            img = self.act(h) @ bases[s]
            act[h] = Kt.left_inverse() @ img if Kt.cols else Mat.zeros(0, bases[s].cols)
        return Module(self.C, [bases[z].cols for z in range(self.C.n)], act), bases


def _equivariant_complement(rad: Mat, actions, n) -> Mat:
    """Columns spanning a complement of `rad` stable under `actions` (a finite group)."""
    if rad.cols == 0:
        return Mat.eye(n)
    comp = _std_complement(rad, n)
    basis = Mat.hstack([rad, comp], m=n)
    inv = basis.inverse()
    # projection onto rad along comp
    sel = Mat.from_dict({(i, i): 1 for i in range(rad.cols)}, n, n)
    p = basis @ sel @ inv
    avg = Mat.zeros(n, n)
    for g in actions:
        avg = avg + g @ p @ g.inverse()
    avg = avg.scale(Fraction(1, len(actions)))
    return (Mat.eye(n) - avg).colspace()


def _std_complement(sub: Mat, n) -> Mat:
    from .linalg import complement_basis
    return complement_basis(sub, n)


class Resolution:
    """P_k → ... → P_0 → Q over C, as a list of stages with embeddings of the kernels."""

    def __init__(self, C: Cat, max_len=16):
        C.check_ei()
        self.C = C
        self.stages = []
        self.kbases = []
        M = Module.constant(C)
        for _ in range(max_len):
            st = _Stage(C, M)
            self.stages.append(st)
            K, bases = st.kernel()
            self.kbases.append(bases)
            if K.is_zero():
                break
            M = K
        else:
            raise EIError("resolution did not terminate")

    def embedding(self, k, g) -> Mat:
        """Generator g of stage k+1 as vectors in P_k(x_g) coordinates."""
        st = self.stages[k + 1]
        x, W, _ = st.gens[g]
        return self.kbases[k][x] @ W


_RES_CACHE = {}


def resolution(C: Cat) -> Resolution:
    key = id(C)
    if key not in _RES_CACHE:
        _RES_CACHE[key] = (C, Resolution(C))
    return _RES_CACHE[key][1]


class Functor:
    """Covariant functor C → chain complexes: objects[x], maps[f] (ChainMap)."""

    def __init__(self, C: Cat, objects, maps):
        self.C = C
        self.objects = list(objects)
        self.maps = dict(maps)

    def check(self) -> bool:
        C = self.C
        for (g, f), h in C.comp.items():
            if self.maps[g].compose(self.maps[f]) != self.maps[h]:
                return False
        return all(self.maps[C.identities[x]] == _ident(self.objects[x]) for x in range(C.n))

    def degrees(self):
        return sorted({n for X in self.objects for n in X.dims})


def _ident(X):
    from .chains import identity_map
    return identity_map(X)


def _vec(m: Mat) -> list:
    return [m[i, j] for j in range(m.cols) for i in range(m.rows)]


# holim --------------------------------------------------------------------

class _HomBasis:
    """Basis of Hom_C(P_k, F_m) = ⊕_g Hom_{Aut}(W_g, F_m(x_g))."""

    def __init__(self, st: _Stage, F: Functor, m):
        self.shapes = []
        offs = 0
        for x, W, rho in st.gens:
            r, n = W.cols, F.objects[x].dim(m)
            self.shapes.append((offs, n, r))
            offs += n * r
        self.size = offs
        rows = []
        for gi, (x, W, rho) in enumerate(st.gens):
            o, n, r = self.shapes[gi]
            for a, ra in rho.items():
                Fa = F.maps[a].at(m)
                # Fa ψ − ψ ρ(a) = 0, ψ stored column-major
                for i in range(n):
                    for j in range(r):
                        ent = {}
                        for k in range(n):
                            v = Fa[i, k]
                            if v:
                                ent[o + j * n + k] = ent.get(o + j * n + k, 0) + v
                        for k in range(r):
                            v = ra[k, j]
                            if v:
                                ent[o + k * n + i] = ent.get(o + k * n + i, 0) - v
                        if any(ent.values()):
                            rows.append(Mat.from_dict({(0, c): v for c, v in ent.items() if v}, 1, offs))
        A = Mat.vstack(rows, n=offs) if rows else Mat.zeros(0, offs)
        self.B = A.nullspace() if offs else Mat.zeros(0, 0)
        self.dim = self.B.cols
        self._linv = self.B.left_inverse() if self.dim else Mat.zeros(0, offs)

    def unpack(self, vec: Mat):
        out = []
        for o, n, r in self.shapes:
            out.append(Mat.from_rows([[vec[o + j * n + i, 0] for j in range(r)] for i in range(n)], m=n, n=r))
        return out

    def pack(self, psis) -> Mat:
        ent = {}
        for (o, n, r), p in zip(self.shapes, psis):
            for i, j, v in p.entries():
                ent[(o + j * n + i, 0)] = v
        return Mat.from_dict(ent, self.size, 1)

    def coords(self, vec: Mat) -> Mat:
        return self._linv @ vec


def holim_ei(F: Functor, res: Resolution = None) -> tuple:
    """(holim complex, bookkeeping) over the EI category F.C."""
    res = res or resolution(F.C)
    degs = F.degrees()
    asm = _Assembler()
    bases = {}
    for k, st in enumerate(res.stages):
        for m in degs:
            hb = _HomBasis(st, F, m)
            bases[(k, m)] = hb
            asm.add((k, m), m - k, hb.dim)
    pieces = []
    for (k, m), hb in bases.items():
        if hb.dim == 0:
            continue
        n = m - k
        st = res.stages[k]
        # d_F part: ψ ↦ d ψ
        if (k, m - 1) in bases and bases[(k, m - 1)].dim:
            tgt = bases[(k, m - 1)]
            cols = []
            for c in range(hb.dim):
                psis = hb.unpack(hb.B.submatrix(cols=[c]))
                new = [F.objects[x].diff(m) @ p for (x, _, _), p in zip(st.gens, psis)]
                cols.append(tgt.coords(tgt.pack(new)))
            pieces.append(((k, m), (k, m - 1), n, Mat.hstack(cols, m=tgt.dim)))
        # (-1)^m ∂^*: ψ ↦ ψ ∘ ∂ on stage k+1
        if k + 1 < len(res.stages) and bases[(k + 1, m)].dim:
            tgt = bases[(k + 1, m)]
            nxt = res.stages[k + 1]
            sg = -1 if m % 2 else 1
            cols = []
            for c in range(hb.dim):
                psis = hb.unpack(hb.B.submatrix(cols=[c]))
                new = []
                for g2, (x2, W2, _) in enumerate(nxt.gens):
                    emb = res.embedding(k, g2)
                    freecols = st.free_eval(x2, lambda f: F.maps[f].at(m), psis)
                    nF = F.objects[x2].dim(m)
                    phi = (Mat.hstack(freecols, m=nF) if freecols else Mat.zeros(nF, 0)) @ st.qr[x2]
                    new.append(phi @ emb)
                cols.append(tgt.coords(tgt.pack(new)).scale(sg))
            pieces.append(((k, m), (k + 1, m), n, Mat.hstack(cols, m=tgt.dim)))
    H = asm.build(pieces)
    return H, (res, bases, asm)


def holim_cone_map(F: Functor, Y: ChainComplex, phi, H=None) -> ChainMap:
    """Y → holim F from a strict cone phi[x]: Y → F(x) (chain maps, natural)."""
    if H is None:
        H = holim_ei(F)
    Hc, (res, bases, asm) = H
    st = res.stages[0]
    ent = {}
    for m in Y.dims:
        hb = bases.get((0, m))
        if hb is None or hb.dim == 0:
            continue
        o = asm.offs.get(((0, m), m))
        cols = []
        for j in range(Y.dim(m)):
            psis = [phi[x].at(m).submatrix(cols=[j]) @ W for x, W, _ in st.gens]
            cols.append(hb.coords(hb.pack(psis)))
        blk = Mat.hstack(cols, m=hb.dim)
        e = ent.setdefault(m, {})
        for i, j, v in blk.entries():
            e[(o + i, j)] = v
    comps = {n: Mat.from_dict(ent.get(n, {}), Hc.dim(n), Y.dim(n)) for n in Y.dims}
    return ChainMap(Y, Hc, comps)


# hocolim ------------------------------------------------------------------

class _TensorBlock:
    """W_g ⊗_{Aut} F_m(x_g) as a quotient of W ⊗ F_m(x)."""

    def __init__(self, x, W, rho, F: Functor, m):
        r, n = W.cols, F.objects[x].dim(m)
        self.r, self.n = r, n
        rels = []
        for a, ra in rho.items():
            Fa = F.maps[a].at(m)
            # w ⊗ F(a)y − ρ(a)w ⊗ y
            rels.append(kron_(Mat.eye(r), Fa) - kron_(ra, Mat.eye(n)))
        R = Mat.hstack(rels, m=r * n) if rels else Mat.zeros(r * n, 0)
        self.q = R.cokernel() if R.cols and not R.is_zero() else Mat.eye(r * n)
        self.dim = self.q.rows
        self.qr = self.q.right_inverse() if self.dim else Mat.zeros(r * n, 0)


def kron_(a, b):
    from .linalg import kron
    return kron(a, b)


def hocolim_ei(F: Functor, res: Resolution = None) -> tuple:
    """(hocolim complex, bookkeeping) over the EI category F.C."""
    C = F.C
    res = res or resolution(C.op())
    degs = F.degrees()
    asm = _Assembler()
    blocks = {}
    for k, st in enumerate(res.stages):
        for gi, (x, W, rho) in enumerate(st.gens):
            for m in degs:
                tb = _TensorBlock(x, W, rho, F, m)
                blocks[(k, gi, m)] = tb
                asm.add((k, gi, m), k + m, tb.dim)
    pieces = []
    for (k, gi, m), tb in blocks.items():
        if tb.dim == 0:
            continue
        st = res.stages[k]
        x = st.gens[gi][0]
        n = k + m
        # 1 ⊗ d
        if (k, gi, m - 1) in blocks and blocks[(k, gi, m - 1)].dim:
            t2 = blocks[(k, gi, m - 1)]
            M = t2.q @ kron_(Mat.eye(tb.r), F.objects[x].diff(m)) @ tb.qr
            pieces.append(((k, gi, m), (k, gi, m - 1), n, M))
        # (-1)^m ∂ ⊗ 1 into stage k-1
        if k == 0:
            continue
        prev = res.stages[k - 1]
        emb = res.embedding(k - 1, gi)            # W_g → R_{k-1}(x) coords
        lift = prev.qr[x] @ emb                    # free coords (g', f, j) of stage k-1 at x
        coords, _ = prev.free[x]
        sg = -1 if m % 2 else 1
        nF = F.objects[x].dim(m)
        targets = {}
        for row, (g2, f, j2) in enumerate(coords):
            for jj in range(tb.r):
                c = lift[row, jj]
                if not c:
                    continue
                t2 = blocks.get((k - 1, g2, m))
                if t2 is None or t2.dim == 0:
                    continue
                # e_jj ⊗ y ↦ c · e_j2 ⊗ F(f) y, with f: x → x_{g2} in C
                Ff = F.maps[f].at(m)
                sel = Mat.from_dict({(j2, jj): c}, t2.r, tb.r)
                contrib = kron_(sel, Ff)
                targets[g2] = targets.get(g2, Mat.zeros(t2.r * t2.n, tb.r * nF)) + contrib
        for g2, M in targets.items():
            t2 = blocks[(k - 1, g2, m)]
            pieces.append(((k, gi, m), (k - 1, g2, m), n, (t2.q @ M @ tb.qr).scale(sg)))
    H = asm.build(pieces)
    return H, (res, blocks, asm)


def hocolim_cocone_map(F: Functor, Y: ChainComplex, phi, H=None) -> ChainMap:
    """hocolim F → Y from a strict cocone phi[x]: F(x) → Y."""
    if H is None:
        H = hocolim_ei(F)
    Hc, (res, blocks, asm) = H
    st = res.stages[0]
    ent = {}
    for (k, gi, m), tb in blocks.items():
        if k != 0 or tb.dim == 0:
            continue
        x, W, _ = st.gens[gi]
        o = asm.offs.get(((k, gi, m), m))
        # [w ⊗ y] ↦ ε(w) φ_x(y); W sits inside the constant module Q
        M = kron_(W, phi[x].at(m)) @ tb.qr
        e = ent.setdefault(m, {})
        for i, j, v in M.entries():
            e[(i, o + j)] = v
    comps = {n: Mat.from_dict(ent.get(n, {}), Y.dim(n), Hc.dim(n)) for n in Hc.dims}
    return ChainMap(Hc, Y, comps)
