"""Spectral sequence of a coordinate-filtered cochain complex.

Every basis label of every term carries a filtration level; F^s is the
span of labels with level ≥ s.  Pages are computed per internal degree u
from Z_r^s = {x ∈ F^s : dx ∈ F^{s+r}} and
B_r^s = Z_{r-1}^{s+1} + d Z_{r-1}^{s-r+1}.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from .cobar import CochainComplex, ComplexError
from .fplin import SparseMatrix, Subspace, kernel, quotient, rank

Cell = Tuple[int, int, int]  # (s, t, u) with t = n - s


class FiltrationError(ValueError):
    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class FilteredComplex:
    def __init__(self, total: CochainComplex, level: Callable[[int, object], int], name: str = ""):
        self.total = total
        self.name = name or total.provenance
        self.p = total.p
        self._levels: Dict[Tuple[int, int], List[int]] = {}
        self._level_fn = level

    def levels(self, n: int, u: int) -> List[int]:
        key = (n, u)
        lv = self._levels.get(key)
        if lv is None:
            lv = [self._level_fn(n, lab) for lab in self.total.terms[n].labels(u)]
            self._levels[key] = lv
        return lv

    def level_of(self, n: int, label) -> int:
        return self._level_fn(n, label)

    def max_level(self) -> int:
        return self.total.n_max

    def check(self) -> None:
        """Decreasing, first quadrant, and preserved by d."""
        tot = self.total
        for n in range(tot.n_max + 1):
            for u in tot.terms[n].degrees():
                lv = self.levels(n, u)
                if any(l < 0 or l > n for l in lv):
                    raise FiltrationError(f"filtration level outside 0..{n} at term {n}, degree {u}", (n, u))
                if n == tot.n_max:
                    continue
                tl = self.levels(n + 1, u)
                m = tot.d[n].block(u)
                for j, col in enumerate(m.column_vectors()):
                    for i in col:
                        if tl[i] < lv[j]:
                            lab = tot.terms[n].labels(u)[j]
                            raise FiltrationError(f"filtration not preserved by d: {tot.terms[n].fmt(lab)} "
                                                  f"(level {lv[j]}) hits level {tl[i]}", (n, u, lab))


@dataclass
class CellData:
    Z: Subspace
    B: Subspace
    reps: List[Dict[int, int]]
    proj: SparseMatrix

    @property
    def dim(self) -> int:
        return len(self.reps)

    def classify(self, v: Dict[int, int]) -> Dict[int, int]:
        return self.proj.apply(self.Z.coordinates(v))


@dataclass
class Page:
    r: int
    cells: Dict[Cell, CellData] = field(default_factory=dict)
    d: Dict[Cell, SparseMatrix] = field(default_factory=dict)

    def dim(self, s: int, t: int, u: int) -> int:
        c = self.cells.get((s, t, u))
        return c.dim if c is not None else 0

    @property
    def table(self) -> Dict[Cell, int]:
        return {k: c.dim for k, c in sorted(self.cells.items()) if c.dim}

    def rows(self):
        return [(s, t, u, d, "") for (s, t, u), d in sorted(self.table.items())]


class _DegreeEngine:
    """All page data for one internal degree."""

    def __init__(self, fc: FilteredComplex, u: int):
        self.fc = fc
        self.u = u
        self.p = fc.p
        tot = fc.total
        self.N = tot.n_max
        self.dims = [tot.terms[n].dim(u) for n in range(self.N + 1)]
        self.lev = [fc.levels(n, u) if self.dims[n] else [] for n in range(self.N + 1)]
        self.dmat = [tot.block(n, u) for n in range(self.N + 1)]
        self.dcols = [m.column_vectors() for m in self.dmat]
        self._Z: Dict[Tuple[int, int, int], Subspace] = {}

    def F(self, s: int, n: int) -> List[int]:
        return [i for i, l in enumerate(self.lev[n]) if l >= s]

    def Z(self, r: int, s: int, n: int) -> Subspace:
        """{x ∈ F^s T^n : dx ∈ F^{s+r}}; r ≤ 0 gives F^s."""
        if n < 0 or n > self.N:
            return Subspace.zero(0, self.p)
        # F^s = F^0 for s < 0, but the target level s + r keeps the true s
        lim = s + r
        s = max(s, 0)
        key = (min(lim, self.N + 2), s, n, r <= 0)
        if key in self._Z:
            return self._Z[key]
        idx = self.F(s, n)
        if r <= 0 or n == self.N:
            # the top term is a truncation: d out of it is treated as zero
            sub = Subspace.coordinate(idx, self.dims[n], self.p)
        else:
            tl = self.lev[n + 1]
            cols = []
            for i in idx:
                cols.append({row: c for row, c in self.dcols[n][i].items() if tl[row] < lim})
            ker = kernel(SparseMatrix.from_columns(cols, self.dims[n + 1], self.p))
            vecs = [{idx[j]: c for j, c in v.items()} for v in ker.vectors()]
            sub = Subspace.span(vecs, self.dims[n], self.p)
        self._Z[key] = sub
        return sub

    def cell(self, r: int, s: int, n: int) -> CellData:
        z = self.Z(r, s, n)
        b1 = self.Z(r - 1, s + 1, n)
        src = self.Z(r - 1, s - r + 1, n - 1) if n >= 1 else None
        vecs = list(b1.vectors())
        if src is not None and s - r + 1 <= n - 1:
            dm = self.dmat[n - 1]
            vecs.extend(dm.apply(v) for v in src.vectors())
        b = Subspace.span([v for v in vecs if v], self.dims[n], self.p)
        reps, proj = quotient(z, b)
        return CellData(z, b, reps, proj)


class SpectralSequence:
    """Pages E_0..E_{r_max} and E_∞ of a filtered complex."""

    def __init__(self, fc: FilteredComplex, r_max: int = 3, n_range: Optional[Sequence[int]] = None,
                 degrees: Optional[Sequence[int]] = None, jobs: int = 1, check: bool = True):
        self.fc = fc
        self.r_max = r_max
        tot = fc.total
        self.n_range = list(n_range) if n_range is not None else list(range(tot.n_max + 1))
        self.degrees = list(degrees) if degrees is not None else tot.degrees()
        self.pages: List[Page] = [Page(r) for r in range(r_max + 1)]
        self.infinity = Page(10 ** 6)
        self.homology: Dict[Tuple[int, int], int] = {}
        self._engines: Dict[int, _DegreeEngine] = {}
        if check:
            fc.check()
        if jobs > 1:
            with ThreadPoolExecutor(max_workers=jobs) as ex:
                results = list(ex.map(self._compute_degree, self.degrees))
        else:
            results = [self._compute_degree(u) for u in self.degrees]
        # merge in degree order so output never depends on the schedule
        for u, (pages, inf, hom) in zip(self.degrees, results):
            for r, (cells, ds) in enumerate(pages):
                self.pages[r].cells.update(cells)
                self.pages[r].d.update(ds)
            self.infinity.cells.update(inf)
            self.homology.update(hom)
        for pg in self.pages + [self.infinity]:
            pg.cells = dict(sorted(pg.cells.items()))
            pg.d = dict(sorted(pg.d.items()))

    def _compute_degree(self, u: int):
        eng = _DegreeEngine(self.fc, u)
        self._engines[u] = eng
        tot = self.fc.total
        N = tot.n_max
        pages = []
        for r in range(self.r_max + 1):
            cells: Dict[Cell, CellData] = {}
            for n in range(N + 1):
                if not eng.dims[n]:
                    continue
                for s in range(n + 1):
                    cells[(s, n - s, u)] = eng.cell(r, s, n)
            ds: Dict[Cell, SparseMatrix] = {}
            for (s, t, _u), cd in cells.items():
                n = s + t
                if n >= N:
                    continue
                tgt = cells.get((s + r, t - r + 1, u))
                if tgt is None or not cd.dim:
                    continue
                cols = [tgt.classify(eng.dmat[n].apply(x)) for x in cd.reps]
                m = SparseMatrix.from_columns(cols, tgt.dim, self.fc.p)
                if not m.is_zero():
                    ds[(s, t, u)] = m
            pages.append((cells, ds))
        inf: Dict[Cell, CellData] = {}
        R = N + 2
        hom = {}
        for n in range(N + 1):
            if not eng.dims[n]:
                continue
            for s in range(n + 1):
                inf[(s, n - s, u)] = eng.cell(R, s, n)
            hom[(n, u)] = tot.homology(n, u).dim
        return pages, inf, hom

    # ------------------------------------------------------------ checks

    def check_differentials_square_zero(self) -> None:
        for pg in self.pages:
            r = pg.r
            for (s, t, u), m in pg.d.items():
                nxt = pg.d.get((s + r, t - r + 1, u))
                if nxt is not None and not (nxt @ m).is_zero():
                    raise ComplexError(f"d_{r}∘d_{r} ≠ 0 at {(s, t, u)}", witness=(r, s, t, u))

    def check_bookkeeping(self, n_limit: Optional[int] = None) -> None:
        """dim E_{r+1} = dim ker d_r − dim im d_r at every cell below the truncation."""
        N = self.fc.total.n_max if n_limit is None else n_limit
        for r in range(self.r_max):
            pg, nxt = self.pages[r], self.pages[r + 1]
            for (s, t, u), cd in pg.cells.items():
                if s + t >= N:
                    continue
                out = pg.d.get((s, t, u))
                rk_out = rank(out) if out is not None else 0
                inc = pg.d.get((s - r, t + r - 1, u))
                rk_in = rank(inc) if inc is not None else 0
                want = cd.dim - rk_out - rk_in
                if nxt.dim(s, t, u) != want:
                    raise ComplexError(f"page bookkeeping fails at E_{r + 1}{(s, t, u)}: "
                                       f"{nxt.dim(s, t, u)} vs {want}", witness=(r, s, t, u))

    def check_convergence(self, n_limit: Optional[int] = None) -> None:
        """Σ_s dim E_∞^{s,n−s,u} = dim H^n_u."""
        N = self.fc.total.n_max if n_limit is None else n_limit
        sums: Dict[Tuple[int, int], int] = {}
        for (s, t, u), cd in self.infinity.cells.items():
            sums[(s + t, u)] = sums.get((s + t, u), 0) + cd.dim
        for (n, u), h in self.homology.items():
            if n >= N:
                continue
            if sums.get((n, u), 0) != h:
                raise ComplexError(f"associated graded of E_∞ does not sum to H^{n} in degree {u}: "
                                   f"{sums.get((n, u), 0)} vs {h}", witness=(n, u))

    def engine(self, u: int) -> _DegreeEngine:
        return self._engines[u]

    def classify(self, r: int, cell: Cell, vec: Dict[int, int]) -> Dict[int, int]:
        pg = self.pages[r] if r < len(self.pages) else self.infinity
        return pg.cells[cell].classify(vec)


def pages_from_filtration(fc: FilteredComplex, r_max: int = 3, jobs: int = 1) -> SpectralSequence:
    return SpectralSequence(fc, r_max=r_max, jobs=jobs)
