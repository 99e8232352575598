"""Exact sparse linear algebra over a prime field F_p.

Vectors are plain dicts ``{index: value}`` with values in ``[1, p-1]``;
absent keys are zero.  Everything returned as a subspace is in canonical
reduced row-echelon form, so equal subspaces compare equal structurally.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Sequence, Tuple

Vector = Dict[int, int]

MAX_PRIME = 2 ** 31


class LinearAlgebraError(ValueError):
    pass


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


class PrimeField:
    __slots__ = ("p",)

    def __init__(self, p: int):
        if not isinstance(p, int) or not _is_prime(p):
            raise LinearAlgebraError(f"{p!r} is not prime")
        if p > MAX_PRIME:
            raise LinearAlgebraError(f"p = {p} exceeds 2^31")
        self.p = p

    def __eq__(self, other):
        return isinstance(other, PrimeField) and other.p == self.p

    def __hash__(self):
        return hash(("F", self.p))

    def __repr__(self):
        return f"F_{self.p}"

    def reduce(self, a: int) -> int:
        return a % self.p

    def inv(self, a: int) -> int:
        a %= self.p
        if a == 0:
            raise ZeroDivisionError("inverse of 0")
        return pow(a, -1, self.p)

    def neg(self, a: int) -> int:
        return (-a) % self.p


# ---------------------------------------------------------------- vectors

def vec_clean(v: Vector, p: int) -> Vector:
    out = {}
    for k, c in v.items():
        c %= p
        if c:
            out[k] = c
    return out


def vec_axpy(y: Vector, a: int, x: Vector, p: int) -> None:
    """In place ``y += a*x`` mod p."""
    if not a:
        return
    for k, c in x.items():
        s = (y.get(k, 0) + a * c) % p
        if s:
            y[k] = s
        else:
            y.pop(k, None)


def vec_scale(v: Vector, a: int, p: int) -> Vector:
    a %= p
    if not a:
        return {}
    return {k: (c * a) % p for k, c in v.items()}


# ---------------------------------------------------------------- matrices

class SparseMatrix:
    """Row-major sparse matrix over F_p.  Acts on column vectors."""

    __slots__ = ("rows", "cols", "p", "_data")

    def __init__(self, rows: int, cols: int, p: int, data: Dict[int, Vector] | None = None):
        self.rows = rows
        self.cols = cols
        self.p = p
        self._data: Dict[int, Vector] = {}
        if data:
            for r, row in data.items():
                if not 0 <= r < rows:
                    raise LinearAlgebraError(f"row {r} out of range")
                row = vec_clean(row, p)
                for c in row:
                    if not 0 <= c < cols:
                        raise LinearAlgebraError(f"column {c} out of range")
                if row:
                    self._data[r] = row

    # construction
    @classmethod
    def from_entries(cls, rows, cols, p, entries: Iterable[Tuple[int, int, int]]):
        data: Dict[int, Vector] = {}
        for r, c, v in entries:
            row = data.setdefault(r, {})
            row[c] = (row.get(c, 0) + v) % p
        return cls(rows, cols, p, data)

    @classmethod
    def from_rows(cls, vectors: Sequence[Vector], cols: int, p: int):
        return cls(len(vectors), cols, p, {i: v for i, v in enumerate(vectors) if v})

    @classmethod
    def from_columns(cls, vectors: Sequence[Vector], rows: int, p: int):
        data: Dict[int, Vector] = {}
        for j, v in enumerate(vectors):
            for i, c in v.items():
                c %= p
                if c:
                    data.setdefault(i, {})[j] = c
        return cls(rows, len(vectors), p, data)

    @classmethod
    def from_dense(cls, dense: Sequence[Sequence[int]], p: int, cols: int | None = None):
        ncols = len(dense[0]) if dense else (cols or 0)
        data = {i: {j: x for j, x in enumerate(row) if x % p} for i, row in enumerate(dense)}
        return cls(len(dense), ncols, p, data)

    @classmethod
    def identity(cls, n: int, p: int):
        return cls(n, n, p, {i: {i: 1} for i in range(n)})

    @classmethod
    def zero(cls, rows: int, cols: int, p: int):
        return cls(rows, cols, p)

    # access
    @property
    def shape(self):
        return (self.rows, self.cols)

    @property
    def entries(self) -> List[Tuple[int, int, int]]:
        return [(r, c, v) for r in sorted(self._data) for c, v in sorted(self._data[r].items())]

    def nnz(self) -> int:
        return sum(len(r) for r in self._data.values())

    def row(self, i: int) -> Vector:
        return dict(self._data.get(i, {}))

    def row_vectors(self) -> List[Vector]:
        return [dict(self._data.get(i, {})) for i in range(self.rows)]

    def column_vectors(self) -> List[Vector]:
        cols: List[Vector] = [dict() for _ in range(self.cols)]
        for r, row in self._data.items():
            for c, v in row.items():
                cols[c][r] = v
        return cols

    def get(self, i: int, j: int) -> int:
        return self._data.get(i, {}).get(j, 0)

    def to_dense(self) -> List[List[int]]:
        out = [[0] * self.cols for _ in range(self.rows)]
        for r, row in self._data.items():
            for c, v in row.items():
                out[r][c] = v
        return out

    def is_zero(self) -> bool:
        return not self._data

    # algebra
    def transpose(self) -> "SparseMatrix":
        data: Dict[int, Vector] = {}
        for r, row in self._data.items():
            for c, v in row.items():
                data.setdefault(c, {})[r] = v
        return SparseMatrix(self.cols, self.rows, self.p, data)

    T = property(transpose)

    def apply(self, v: Vector) -> Vector:
        p = self.p
        out: Vector = {}
        for r, row in self._data.items():
            s = 0
            for c, x in row.items():
                y = v.get(c)
                if y:
                    s += x * y
            s %= p
            if s:
                out[r] = s
        return out

    def __matmul__(self, other: "SparseMatrix") -> "SparseMatrix":
        if self.cols != other.rows:
            raise LinearAlgebraError(f"dimension mismatch {self.shape} @ {other.shape}")
        p = self.p
        data: Dict[int, Vector] = {}
        odata = other._data
        for r, row in self._data.items():
            acc: Vector = {}
            for k, a in row.items():
                orow = odata.get(k)
                if orow:
                    for c, b in orow.items():
                        acc[c] = acc.get(c, 0) + a * b
            acc = vec_clean(acc, p)
            if acc:
                data[r] = acc
        return SparseMatrix(self.rows, other.cols, p, data)

    def __add__(self, other: "SparseMatrix") -> "SparseMatrix":
        if self.shape != other.shape:
            raise LinearAlgebraError("shape mismatch in addition")
        data = {r: dict(row) for r, row in self._data.items()}
        for r, row in other._data.items():
            tgt = data.setdefault(r, {})
            vec_axpy(tgt, 1, row, self.p)
        return SparseMatrix(self.rows, self.cols, self.p, data)

    def scale(self, a: int) -> "SparseMatrix":
        return SparseMatrix(self.rows, self.cols, self.p,
                            {r: vec_scale(row, a, self.p) for r, row in self._data.items()})

    def __neg__(self):
        return self.scale(-1)

    def __sub__(self, other):
        return self + (-other)

    def __eq__(self, other):
        return (isinstance(other, SparseMatrix) and self.shape == other.shape
                and self.p == other.p and self._data == other._data)

    def __repr__(self):
        return f"SparseMatrix({self.rows}x{self.cols} over F_{self.p}, nnz={self.nnz()})"


# ---------------------------------------------------------------- echelon

class _Echelon:
    """Incremental row echelon form keyed by leading column."""

    def __init__(self, p: int):
        self.p = p
        self.rows: Dict[int, Vector] = {}

    def reduce(self, v: Vector) -> Vector:
        p = self.p
        v = dict(v)
        rows = self.rows
        while True:
            hits = [c for c in v if c in rows]
            if not hits:
                return v
            c = min(hits)
            vec_axpy(v, p - v[c], rows[c], p)

    def add(self, v: Vector) -> int | None:
        v = self.reduce(v)
        if not v:
            return None
        c = min(v)
        inv = pow(v[c], -1, self.p)
        self.rows[c] = vec_scale(v, inv, self.p)
        return c

    def reduced_rows(self) -> Tuple[List[Vector], List[int]]:
        p = self.p
        pivots = sorted(self.rows)
        done: Dict[int, Vector] = {}
        for c in reversed(pivots):
            row = dict(self.rows[c])
            for c2 in sorted(k for k in row if k in done and k != c):
                if c2 in row:
                    vec_axpy(row, p - row[c2], done[c2], p)
            done[c] = row
        return [done[c] for c in pivots], pivots


def _rref_vectors(vectors: Iterable[Vector], p: int) -> Tuple[List[Vector], List[int]]:
    ech = _Echelon(p)
    for v in vectors:
        if v:
            ech.add(v)
    return ech.reduced_rows()


def rref(m: SparseMatrix) -> Tuple[SparseMatrix, List[int]]:
    rows, pivots = _rref_vectors((m.row(i) for i in range(m.rows)), m.p)
    return SparseMatrix.from_rows(rows, m.cols, m.p), pivots


def rank(m: SparseMatrix) -> int:
    if m.rows <= m.cols:
        vecs = m.row_vectors()
    else:
        vecs = m.column_vectors()
    ech = _Echelon(m.p)
    r = 0
    for v in vecs:
        if v and ech.add(v) is not None:
            r += 1
    return r


# ---------------------------------------------------------------- subspaces

@dataclass(frozen=True)
class Subspace:
    """A subspace of F_p^ambient_dim, stored by its canonical rref basis."""

    ambient_dim: int
    p: int
    rows: Tuple[Tuple[Tuple[int, int], ...], ...]
    pivots: Tuple[int, ...] = field(default=())

    @classmethod
    def span(cls, vectors: Iterable[Vector], ambient_dim: int, p: int) -> "Subspace":
        rows, pivots = _rref_vectors((vec_clean(v, p) for v in vectors), p)
        return cls._from_rref(rows, pivots, ambient_dim, p)

    @classmethod
    def _from_rref(cls, rows, pivots, ambient_dim, p):
        frozen = tuple(tuple(sorted(r.items())) for r in rows)
        return cls(ambient_dim, p, frozen, tuple(pivots))

    @classmethod
    def zero(cls, ambient_dim: int, p: int) -> "Subspace":
        return cls(ambient_dim, p, (), ())

    @classmethod
    def full(cls, ambient_dim: int, p: int) -> "Subspace":
        return cls(ambient_dim, p, tuple(((i, 1),) for i in range(ambient_dim)), tuple(range(ambient_dim)))

    @classmethod
    def coordinate(cls, indices: Iterable[int], ambient_dim: int, p: int) -> "Subspace":
        idx = sorted(set(indices))
        return cls(ambient_dim, p, tuple(((i, 1),) for i in idx), tuple(idx))

    @property
    def dim(self) -> int:
        return len(self.rows)

    @property
    def basis(self) -> SparseMatrix:
        return SparseMatrix.from_rows(self.vectors(), self.ambient_dim, self.p)

    def vectors(self) -> List[Vector]:
        return [dict(r) for r in self.rows]

    def residual(self, v: Vector) -> Vector:
        p = self.p
        v = vec_clean(v, p)
        for piv, row in zip(self.pivots, self.rows):
            a = v.get(piv)
            if a:
                vec_axpy(v, p - a, dict(row), p)
        return v

    def contains(self, v: Vector) -> bool:
        return not self.residual(v)

    def coordinates(self, v: Vector, check: bool = True) -> Vector:
        """Coordinates of v in the rref basis (read off at the pivots)."""
        if check and self.residual(v):
            raise LinearAlgebraError("not a subspace: vector outside the span")
        out = {}
        for i, piv in enumerate(self.pivots):
            a = v.get(piv, 0) % self.p
            if a:
                out[i] = a
        return out

    def embed(self, coords: Vector) -> Vector:
        out: Vector = {}
        for i, a in coords.items():
            vec_axpy(out, a, dict(self.rows[i]), self.p)
        return out

    def is_subspace_of(self, other: "Subspace") -> bool:
        return all(other.contains(dict(r)) for r in self.rows)

    def __add__(self, other: "Subspace") -> "Subspace":
        return Subspace.span(self.vectors() + other.vectors(), self.ambient_dim, self.p)

    def intersect(self, other: "Subspace") -> "Subspace":
        if self.dim == 0 or other.dim == 0:
            return Subspace.zero(self.ambient_dim, self.p)
        # solve a.A = b.B via kernel of the stacked transpose
        a_vecs = self.vectors()
        b_vecs = other.vectors()
        cols = a_vecs + [vec_scale(v, -1, self.p) for v in b_vecs]
        m = SparseMatrix.from_columns(cols, self.ambient_dim, self.p)
        ker = kernel(m)
        out = []
        for k in ker.vectors():
            w: Vector = {}
            for i, c in k.items():
                if i < len(a_vecs):
                    vec_axpy(w, c, a_vecs[i], self.p)
            out.append(w)
        return Subspace.span(out, self.ambient_dim, self.p)


def kernel(m: SparseMatrix) -> Subspace:
    rows, pivots = _rref_vectors((m.row(i) for i in range(m.rows)), m.p)
    p = m.p
    pivset = set(pivots)
    free = [j for j in range(m.cols) if j not in pivset]
    # column f of the rref, restricted to pivot rows
    colmap: Dict[int, List[Tuple[int, int]]] = {}
    for piv, row in zip(pivots, rows):
        for c, v in row.items():
            if c != piv:
                colmap.setdefault(c, []).append((piv, v))
    vecs = []
    for f in free:
        v = {f: 1}
        for piv, a in colmap.get(f, ()):
            v[piv] = (-a) % p
        vecs.append(v)
    return Subspace.span(vecs, m.cols, p)


def image(m: SparseMatrix) -> Subspace:
    return Subspace.span(m.column_vectors(), m.rows, m.p)


def quotient(ambient: Subspace, sub: Subspace) -> Tuple[List[Vector], SparseMatrix]:
    """Complement representatives of ambient/sub and the projection.

    The projection acts on ambient coordinates (w.r.t. ambient's rref basis)
    and returns coordinates w.r.t. the representatives.
    """
    p = ambient.p
    sub_coords = []
    for r in sub.rows:
        v = dict(r)
        if ambient.residual(v):
            raise LinearAlgebraError("not a subspace: sub is not contained in ambient")
        sub_coords.append(ambient.coordinates(v, check=False))
    srows, spivs = _rref_vectors(sub_coords, p)
    pivset = set(spivs)
    keep = [j for j in range(ambient.dim) if j not in pivset]
    kpos = {j: i for i, j in enumerate(keep)}
    entries = [(kpos[j], j, 1) for j in keep]
    for piv, row in zip(spivs, srows):
        for c, v in row.items():
            if c != piv:
                entries.append((kpos[c], piv, (-v) % p))
    proj = SparseMatrix.from_entries(len(keep), ambient.dim, p, entries)
    reps = [dict(ambient.rows[j]) for j in keep]
    return reps, proj


@dataclass
class Homology:
    dim: int
    representatives: List[Vector]
    cycles: Subspace
    boundaries: Subspace
    projection: SparseMatrix

    def __iter__(self):
        yield self.dim
        yield self.representatives

    def coordinates(self, v: Vector) -> Vector:
        """Class of a cycle v in the representative basis."""
        z = self.cycles.coordinates(v)
        return self.projection.apply(z)


def subquotient_homology(d_in: SparseMatrix, d_out: SparseMatrix) -> Homology:
    if d_in.rows != d_out.cols:
        raise LinearAlgebraError("d_in and d_out do not compose")
    if not (d_out @ d_in).is_zero():
        raise LinearAlgebraError("not a complex: d_out . d_in != 0")
    z = kernel(d_out)
    b = image(d_in)
    reps, proj = quotient(z, b)
    return Homology(len(reps), reps, z, b, proj)
