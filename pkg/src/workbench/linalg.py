"""Exact rational matrices.

Thin layer over sympy's sparse DomainMatrix with QQ entries.  Everything
else in the package talks to ``Mat`` only, so the backend can be swapped
without touching the engines.

Conventions: column vectors, a map V -> W with dim V = n, dim W = m is an
m x n matrix.  Zero-sized matrices are legal everywhere.
"""

from __future__ import annotations

from fractions import Fraction

from sympy import QQ
from sympy.polys.matrices import DomainMatrix


def _q(x):
    if isinstance(x, str):
        x = Fraction(x)
    if isinstance(x, Fraction):
        return QQ(x.numerator, x.denominator)
    return QQ(x)


class Mat:
    __slots__ = ("dm",)

    def __init__(self, dm: DomainMatrix):
        self.dm = dm

    # construction ---------------------------------------------------
    @classmethod
    def zeros(cls, m: int, n: int) -> "Mat":
        return cls(DomainMatrix.zeros((m, n), QQ).to_sparse())

    @classmethod
    def eye(cls, n: int) -> "Mat":
        if n == 0:
            return cls.zeros(0, 0)
        return cls(DomainMatrix.eye(n, QQ).to_sparse())

    @classmethod
    def from_rows(cls, rows, m: int | None = None, n: int | None = None) -> "Mat":
        rows = [list(r) for r in rows]
        if m is None:
            m = len(rows)
        if n is None:
            n = len(rows[0]) if rows else 0
        d = {}
        for i, r in enumerate(rows):
            if len(r) != n:
                raise ValueError("ragged matrix rows")
            ri = {}
            for j, x in enumerate(r):
                v = _q(x)
                if v:
                    ri[j] = v
            if ri:
                d[i] = ri
        return cls(DomainMatrix(d, (m, n), QQ))

    @classmethod
    def from_dict(cls, entries: dict, m: int, n: int) -> "Mat":
        d: dict = {}
        for (i, j), x in entries.items():
            v = _q(x)
            if v:
                d.setdefault(i, {})[j] = v
        return cls(DomainMatrix(d, (m, n), QQ))

    @classmethod
    def hstack(cls, mats, m: int | None = None) -> "Mat":
        mats = list(mats)
        if not mats:
            return cls.zeros(m or 0, 0)
        rows = mats[0].rows
        d: dict = {}
        off = 0
        for a in mats:
            if a.rows != rows:
                raise ValueError("hstack row mismatch")
            for i, r in a.dm.rep.items():
                di = d.setdefault(i, {})
                for j, v in r.items():
                    di[off + j] = v
            off += a.cols
        return cls(DomainMatrix(d, (rows, off), QQ))

    @classmethod
    def vstack(cls, mats, n: int | None = None) -> "Mat":
        mats = list(mats)
        if not mats:
            return cls.zeros(0, n or 0)
        cols = mats[0].cols
        d: dict = {}
        off = 0
        for a in mats:
            if a.cols != cols:
                raise ValueError("vstack column mismatch")
            for i, r in a.dm.rep.items():
                d[off + i] = dict(r)
            off += a.rows
        return cls(DomainMatrix(d, (off, cols), QQ))

    @classmethod
    def block_diag(cls, mats) -> "Mat":
        mats = list(mats)
        m = sum(a.rows for a in mats)
        n = sum(a.cols for a in mats)
        d: dict = {}
        ro = co = 0
        for a in mats:
            for i, r in a.dm.rep.items():
                d[ro + i] = {co + j: v for j, v in r.items()}
            ro += a.rows
            co += a.cols
        return cls(DomainMatrix(d, (m, n), QQ))

    @classmethod
    def blocks(cls, grid, row_dims, col_dims) -> "Mat":
        """Assemble from a dict {(bi, bj): Mat}; missing blocks are zero."""
        roff = [0]
        for r in row_dims:
            roff.append(roff[-1] + r)
        coff = [0]
        for c in col_dims:
            coff.append(coff[-1] + c)
        d: dict = {}
        for (bi, bj), a in grid.items():
            if a.shape != (row_dims[bi], col_dims[bj]):
                raise ValueError(f"block {(bi, bj)} has shape {a.shape}")
            for i, r in a.dm.rep.items():
                di = d.setdefault(roff[bi] + i, {})
                for j, v in r.items():
                    di[coff[bj] + j] = v
        return cls(DomainMatrix(d, (roff[-1], coff[-1]), QQ))

    # basic ----------------------------------------------------------
    @property
    def shape(self):
        return self.dm.shape

    @property
    def rows(self) -> int:
        return self.dm.shape[0]

    @property
    def cols(self) -> int:
        return self.dm.shape[1]

    def __matmul__(self, other: "Mat") -> "Mat":
        if self.cols != other.rows:
            raise ValueError(f"shape mismatch {self.shape} @ {other.shape}")
        if self.rows == 0 or other.cols == 0 or self.cols == 0:
            return Mat.zeros(self.rows, other.cols)
        return Mat(self.dm * other.dm)

    def __add__(self, other: "Mat") -> "Mat":
        if self.shape != other.shape:
            raise ValueError(f"shape mismatch {self.shape} + {other.shape}")
        return Mat(self.dm + other.dm)

    def __sub__(self, other: "Mat") -> "Mat":
        if self.shape != other.shape:
            raise ValueError(f"shape mismatch {self.shape} - {other.shape}")
        return Mat(self.dm - other.dm)

    def __neg__(self) -> "Mat":
        return Mat(-self.dm)

    def scale(self, c) -> "Mat":
        c = _q(c)
        if not c:
            return Mat.zeros(*self.shape)
        return Mat(self.dm * c)

    @property
    def T(self) -> "Mat":
        return Mat(self.dm.transpose())

    def __eq__(self, other) -> bool:
        if not isinstance(other, Mat):
            return NotImplemented
        return self.shape == other.shape and (self - other).is_zero()

    def __hash__(self):
        return hash((self.shape, tuple(sorted((i, j, str(v)) for i, r in self.dm.rep.items() for j, v in r.items()))))

    def is_zero(self) -> bool:
        return not any(self.dm.rep.values())

    def __getitem__(self, ij):
        i, j = ij
        v = self.dm.rep.get(i, {}).get(j)
        if not v:
            return Fraction(0)
        return Fraction(int(v.numerator), int(v.denominator))

    def entries(self):
        for i, r in self.dm.rep.items():
            for j, v in r.items():
                if v:
                    yield i, j, Fraction(int(v.numerator), int(v.denominator))

    def to_lists(self):
        out = [[Fraction(0)] * self.cols for _ in range(self.rows)]
        for i, j, v in self.entries():
            out[i][j] = v
        return out

    def to_strings(self):
        return [[_fmt(x) for x in row] for row in self.to_lists()]

    def submatrix(self, rows=None, cols=None) -> "Mat":
        rows = list(range(self.rows)) if rows is None else list(rows)
        cols = list(range(self.cols)) if cols is None else list(cols)
        cpos = {c: k for k, c in enumerate(cols)}
        d: dict = {}
        for k, i in enumerate(rows):
            r = self.dm.rep.get(i)
            if not r:
                continue
            nr = {cpos[j]: v for j, v in r.items() if j in cpos}
            if nr:
                d[k] = nr
        return Mat(DomainMatrix(d, (len(rows), len(cols)), QQ))

    def __repr__(self):
        return f"Mat({self.to_strings()})"

    # linear algebra -------------------------------------------------
    def rank(self) -> int:
        if self.rows == 0 or self.cols == 0:
            return 0
        # plain Gauss-Jordan over Q beats the fraction-free default on our small sparse matrices
        return len(self.dm.rref(method="GJ")[1])

    def rref(self):
        """Reduced row echelon form and pivot columns."""
        if self.rows == 0 or self.cols == 0:
            return Mat.zeros(*self.shape), ()
        r, piv = self.dm.rref(method="GJ")
        return Mat(r), tuple(piv)

    def nullspace(self) -> "Mat":
        """Columns form a basis of the kernel (n x k)."""
        n = self.cols
        if n == 0:
            return Mat.zeros(0, 0)
        if self.rows == 0 or self.is_zero():
            return Mat.eye(n)
        r, piv = self.rref()
        free = [j for j in range(n) if j not in set(piv)]
        if not free:
            return Mat.zeros(n, 0)
        d: dict = {}
        rep = r.dm.rep
        for k, f in enumerate(free):
            d.setdefault(f, {})[k] = QQ(1)
            for row, p in enumerate(piv):
                v = rep.get(row, {}).get(f)
                if v:
                    d.setdefault(p, {})[k] = -v
        return Mat(DomainMatrix(d, (n, len(free)), QQ))

    def left_nullspace(self) -> "Mat":
        """Rows form a basis of {y : y A = 0} (k x m)."""
        return self.T.nullspace().T

    def colspace(self) -> "Mat":
        """Columns form a basis of the image (m x r), chosen among the columns."""
        if self.rows == 0 or self.cols == 0:
            return Mat.zeros(self.rows, 0)
        _, piv = self.rref()
        return self.submatrix(cols=piv)

    def cokernel(self) -> "Mat":
        """Surjection Q with ker Q = im A (r x m)."""
        return self.left_nullspace()

    def solve(self, b: "Mat"):
        """Some X with A X = b, or None."""
        m, n = self.shape
        if b.rows != m:
            raise ValueError("solve: shape mismatch")
        if b.cols == 0:
            return Mat.zeros(n, 0)
        if n == 0:
            return Mat.zeros(0, b.cols) if b.is_zero() else None
        aug = Mat.hstack([self, b])
        r, piv = aug.rref()
        if any(p >= n for p in piv):
            return None
        d: dict = {}
        rep = r.dm.rep
        for row, p in enumerate(piv):
            rr = rep.get(row, {})
            for j in range(b.cols):
                v = rr.get(n + j)
                if v:
                    d.setdefault(p, {})[j] = v
        return Mat(DomainMatrix(d, (n, b.cols), QQ))

    def is_invertible(self) -> bool:
        return self.rows == self.cols and self.rank() == self.rows

    def inverse(self) -> "Mat":
        if not self.is_invertible():
            raise ValueError("matrix not invertible")
        if self.rows == 0:
            return Mat.zeros(0, 0)
        return Mat(self.dm.inv())

    def right_inverse(self) -> "Mat":
        """R with A R = I, for A of full row rank."""
        x = self.solve(Mat.eye(self.rows))
        if x is None:
            raise ValueError("no right inverse: not surjective")
        return x

    def left_inverse(self) -> "Mat":
        """L with L A = I, for A of full column rank."""
        x = self.T.solve(Mat.eye(self.cols))
        if x is None:
            raise ValueError("no left inverse: not injective")
        return x.T


def _fmt(x: Fraction) -> str:
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def parse_rational(s) -> Fraction:
    return Fraction(s)


def kron(a: Mat, b: Mat) -> Mat:
    m, n = a.shape
    p, q = b.shape
    d: dict = {}
    for i, r in a.dm.rep.items():
        for j, v in r.items():
            for k, rb in b.dm.rep.items():
                row = d.setdefault(i * p + k, {})
                for l, w in rb.items():
                    row[j * q + l] = v * w
    return Mat(DomainMatrix(d, (m * p, n * q), QQ))


def image_in(sub: Mat, space: Mat) -> bool:
    """True when every column of ``sub`` lies in the column span of ``space``."""
    if sub.cols == 0:
        return True
    return space.solve(sub) is not None


def intersect(a: Mat, b: Mat) -> Mat:
    """Basis (as columns) of col(a) ∩ col(b)."""
    if a.cols == 0 or b.cols == 0:
        return Mat.zeros(a.rows, 0)
    k = Mat.hstack([a, -b]).nullspace()
    return (a @ k.submatrix(rows=range(a.cols))).colspace()


def complement_basis(sub: Mat, n: int) -> Mat:
    """Standard basis vectors extending the columns of ``sub`` to a basis of Q^n."""
    chosen = []
    cur = sub.colspace() if sub.cols else Mat.zeros(n, 0)
    r = cur.cols
    for i in range(n):
        e = Mat.from_dict({(i, 0): 1}, n, 1)
        trial = Mat.hstack([cur, e])
        if trial.rank() > r:
            cur = trial
            r += 1
            chosen.append(i)
        if r == n:
            break
    return Mat.from_dict({(i, k): 1 for k, i in enumerate(chosen)}, n, len(chosen))
