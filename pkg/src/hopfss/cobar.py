"""Cosimplicial cobar resolutions, normalization, cobar complexes and Cotor."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Dict, List, Mapping, Optional, Sequence, Tuple

from .fplin import Homology, LinearAlgebraError, SparseMatrix, Subspace, image, kernel, rank, subquotient_homology
from .graded import (Element, GradedMap, GradedSpace, GradedSubspace, RestrictionError, compose, elem_add,
                     restrict_corestrict, tensor)
from .hopf import (Bicoaction, Comodule, ComoduleAlgebra, HopfAlgebra, HopfQuotient, diagonal_tensor,
                   multi_cotensor_parts, subcomodule)


class ComplexError(ValueError):
    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


# ---------------------------------------------------------------- complexes

class CochainComplex:
    """Terms 0..n_max with internal-degree-preserving differentials."""

    def __init__(self, terms: Sequence[GradedSpace], differentials: Sequence[GradedMap],
                 p: int, provenance: str = "", coactions: Optional[Sequence[Comodule]] = None):
        if len(differentials) != max(len(terms) - 1, 0):
            raise ComplexError("need one differential between consecutive terms")
        self.terms = list(terms)
        self.d = list(differentials)
        self.p = p
        self.provenance = provenance
        self.coactions = list(coactions) if coactions is not None else None
        self._homology: Dict[Tuple[int, int], Homology] = {}

    @property
    def n_max(self) -> int:
        return len(self.terms) - 1

    def differential(self, n: int) -> GradedMap:
        return self.d[n]

    def block(self, n: int, u: int) -> SparseMatrix:
        """d: term n -> term n+1 in internal degree u (zero matrices off the ends)."""
        if n < 0:
            return SparseMatrix.zero(self.terms[0].dim(u), 0, self.p)
        if n >= self.n_max:
            return SparseMatrix.zero(0, self.terms[n].dim(u), self.p)
        return self.d[n].block(u)

    def degrees(self) -> List[int]:
        us = set()
        for t in self.terms:
            us.update(t.degrees())
        return sorted(us)

    def check(self) -> None:
        """d∘d = 0 in every term and degree; raises with the first failure."""
        for n in range(self.n_max - 1):
            for u in self.terms[n].degrees():
                if not (self.d[n + 1].block(u) @ self.d[n].block(u)).is_zero():
                    raise ComplexError(f"not a complex: d∘d ≠ 0 at term {n}, degree {u}", witness=(n, u))

    def is_complex(self) -> bool:
        try:
            self.check()
            return True
        except ComplexError:
            return False

    def homology(self, n: int, u: int) -> Homology:
        key = (n, u)
        h = self._homology.get(key)
        if h is None:
            h = subquotient_homology(self.block(n - 1, u), self.block(n, u))
            self._homology[key] = h
        return h

    def homology_dims(self, n_range=None) -> Dict[Tuple[int, int], int]:
        out = {}
        for n in (n_range if n_range is not None else range(self.n_max + 1)):
            for u in self.terms[n].degrees():
                d = self.homology(n, u).dim
                if d:
                    out[(n, u)] = d
        return out

    def element(self, n: int, u: int, vec: Mapping[int, int]) -> Element:
        return self.terms[n].from_vector(u, vec)

    def __repr__(self):
        return f"CochainComplex({self.provenance}, n_max={self.n_max})"


class ChainMap:
    def __init__(self, source: CochainComplex, target: CochainComplex, maps: Sequence[GradedMap], name=""):
        self.source = source
        self.target = target
        self.maps = list(maps)
        self.name = name

    def check(self) -> None:
        n_top = min(self.source.n_max, self.target.n_max, len(self.maps) - 1)
        for n in range(n_top):
            for u in self.source.terms[n].degrees():
                lhs = self.target.block(n, u) @ self.maps[n].block(u)
                rhs = self.maps[n + 1].block(u) @ self.source.block(n, u)
                if lhs != rhs:
                    raise ComplexError(f"not a chain map: {self.name} at term {n}, degree {u}", witness=(n, u))

    def induced_rank(self, n: int, u: int) -> Tuple[int, int, int]:
        """(dim H source, dim H target, rank of the induced map)."""
        hs = self.source.homology(n, u)
        ht = self.target.homology(n, u)
        f = self.maps[n].block(u)
        cols = [ht.coordinates(f.apply(r)) for r in hs.representatives]
        return hs.dim, ht.dim, rank(SparseMatrix.from_columns(cols, ht.dim, self.source.p))

    def is_quasi_iso(self, n_range, degrees=None) -> Tuple[bool, Optional[Tuple[int, int]]]:
        for n in n_range:
            us = degrees if degrees is not None else sorted(set(self.source.terms[n].degrees())
                                                            | set(self.target.terms[n].degrees()))
            for u in us:
                a, b, r = self.induced_rank(n, u)
                if not (a == b == r):
                    return False, (n, u)
        return True, None


# ---------------------------------------------------------------- cosimplicial objects

class CosimplicialObject:
    """cofaces[n][i]: level n -> n+1 (i = 0..n+1); codegeneracies[n][j]: level n+1 -> n (j = 0..n)."""

    def __init__(self, levels, cofaces, codegeneracies, p, coactions=None, coaugmentation=None, provenance=""):
        self.levels: List[GradedSpace] = list(levels)
        self.cofaces: List[List[GradedMap]] = list(cofaces)
        self.codegeneracies: List[List[GradedMap]] = list(codegeneracies)
        self.p = p
        self.coactions = coactions
        self.coaugmentation = coaugmentation
        self.provenance = provenance

    @property
    def n_max(self) -> int:
        return len(self.levels) - 1

    def check_identities(self) -> None:
        """All cosimplicial identities, exactly, wherever both sides are defined."""
        N = self.n_max
        cf, cd = self.cofaces, self.codegeneracies
        for n in range(N - 1):
            for j in range(n + 2):
                for i in range(j):
                    # d^j d^i = d^i d^{j-1}
                    if compose(cf[n + 1][j], cf[n][i]) != compose(cf[n + 1][i], cf[n][j - 1]):
                        raise ComplexError(f"cosimplicial identity d^{j}d^{i} = d^{i}d^{j-1} fails at level {n}",
                                           witness=(n, i, j))
        for n in range(N - 1):
            # s^j d^i on level n+1 -> n+2 -> n+1
            for j in range(n + 2):
                for i in range(n + 3):
                    lhs = compose(cd[n + 1][j], cf[n + 1][i])
                    if i < j:
                        rhs = compose(cf[n][i], cd[n][j - 1])
                    elif i in (j, j + 1):
                        rhs = GradedMap.identity(self.levels[n + 1], self.p)
                    else:
                        rhs = compose(cf[n][i - 1], cd[n][j])
                    if lhs != rhs:
                        raise ComplexError(f"cosimplicial identity s^{j}d^{i} fails at level {n + 1}",
                                           witness=(n + 1, i, j))
        for n in range(N - 1):
            for j in range(n + 1):
                for i in range(j + 1, n + 2):
                    # s^j s^i = s^{i-1} s^j for j < i
                    if compose(cd[n][j], cd[n + 1][i]) != compose(cd[n][i - 1], cd[n + 1][j]):
                        raise ComplexError(f"cosimplicial identity s^{j}s^{i} fails at level {n + 2}",
                                           witness=(n + 2, i, j))

    def alternating_complex(self) -> CochainComplex:
        diffs = []
        for n in range(self.n_max):
            acc = None
            for i, f in enumerate(self.cofaces[n]):
                g = f if i % 2 == 0 else f.scale(-1)
                acc = g if acc is None else acc + g
            diffs.append(acc)
        return CochainComplex(self.levels, diffs, self.p, f"alternating({self.provenance})", self.coactions)

    def augmented_complex(self) -> CochainComplex:
        if self.coaugmentation is None:
            raise ComplexError("no coaugmentation")
        alt = self.alternating_complex()
        return CochainComplex([self.coaugmentation.source] + alt.terms, [self.coaugmentation] + alt.d,
                              self.p, f"augmented({self.provenance})")


def _tensor_apply(fn_slot: Callable, word: Tuple, slot: int, p: int) -> Dict:
    """Replace word[slot] by the tuple-valued expansion fn_slot(word[slot])."""
    out: Dict = {}
    pre, post = word[:slot], word[slot + 1:]
    for parts, c in fn_slot(word[slot]).items():
        key = pre + parts + post
        out[key] = (out.get(key, 0) + c) % p
    return out


def _regular_left_on_first(h: HopfAlgebra, space: GradedSpace, name: str) -> Comodule:
    def coact(word):
        return {(a, (b,) + word[1:]): c for (a, b), c in h.coproduct(word[0]).items()}
    return Comodule(h, space, coact, "left", name)


def build_DL(gamma: HopfAlgebra, N: Comodule, n_max: int, max_degree: Optional[int] = None) -> CosimplicialObject:
    """Level n = Γ^{⊗n+1}⊗N; cofaces Δ at slot i then ψ on N; codegeneracies ε at slot j+1."""
    p = gamma.p
    if N.side != "left":
        raise ValueError("build_DL expects a left comodule")
    levels = [tensor([gamma.space] * (n + 1) + [N.space], name=f"Γ^{n + 1}⊗{N.name}") for n in range(n_max + 1)]
    u = gamma.unit

    def coface(n, i):
        def fn(word):
            if i <= n:
                return _tensor_apply(lambda g: {(a, b): c for (a, b), c in gamma.coproduct(g).items()}, word, i, p)
            return _tensor_apply(lambda m: {(a, b): c for (a, b), c in N.coaction(m).items()}, word, n + 1, p)
        return GradedMap.from_function(levels[n], levels[n + 1], p, fn)

    def codeg(n, j):
        def fn(word):
            return {word[:j + 1] + word[j + 2:]: 1} if word[j + 1] == u else {}
        return GradedMap.from_function(levels[n + 1], levels[n], p, fn)

    cofaces = [[coface(n, i) for i in range(n + 2)] for n in range(n_max)]
    codegs = [[codeg(n, j) for j in range(n + 1)] for n in range(n_max)]
    coactions = [_regular_left_on_first(gamma, lv, lv.name) for lv in levels]
    coaug = GradedMap.from_function(N.space, levels[0], p,
                                    lambda m: {(a, b): c for (a, b), c in N.coaction(m).items()})
    return CosimplicialObject(levels, cofaces, codegs, p, coactions, coaug, f"D_L({N.name})")


def build_DR(gamma: HopfAlgebra, M: Comodule, n_max: int) -> CosimplicialObject:
    """Mirror of D_L for a right comodule: level n = M⊗Γ^{⊗n+1}."""
    p = gamma.p
    if M.side != "right":
        raise ValueError("build_DR expects a right comodule")
    levels = [tensor([M.space] + [gamma.space] * (n + 1), name=f"{M.name}⊗Γ^{n + 1}") for n in range(n_max + 1)]
    u = gamma.unit

    def coface(n, i):
        # i = 0: ψ on M; i >= 1: Δ at Γ slot, counted from the left
        def fn(word):
            if i == 0:
                return _tensor_apply(lambda m: dict(M.coaction(m)), word, 0, p)
            return _tensor_apply(lambda g: dict(gamma.coproduct(g)), word, i, p)
        return GradedMap.from_function(levels[n], levels[n + 1], p, fn)

    def codeg(n, j):
        def fn(word):
            return {word[:j + 1] + word[j + 2:]: 1} if word[j + 1] == u else {}
        return GradedMap.from_function(levels[n + 1], levels[n], p, fn)

    cofaces = [[coface(n, i) for i in range(n + 2)] for n in range(n_max)]
    codegs = [[codeg(n, j) for j in range(n + 1)] for n in range(n_max)]
    coaug = GradedMap.from_function(M.space, levels[0], p, lambda m: dict(M.coaction(m)))
    return CosimplicialObject(levels, cofaces, codegs, p, None, coaug, f"D_R({M.name})")


def build_DDelta(phi: ComoduleAlgebra, N: Comodule, n_max: int, max_degree: Optional[int] = None) -> CosimplicialObject:
    """Level n = Φ^{⊗n+1}⊗N with the diagonal Γ-coaction; η_i inserts 1, μ_j multiplies slots j, j+1."""
    p = phi.p
    factors = lambda n: [phi.comodule] * (n + 1) + [N]
    comods = [diagonal_tensor(factors(n), name=f"Φ^{n + 1}⊗{N.name}") for n in range(n_max + 1)]
    levels = [c.space for c in comods]
    one = phi.unit

    def coface(n, i):
        return GradedMap.from_function(levels[n], levels[n + 1], p, lambda w: {w[:i] + (one,) + w[i:]: 1})

    def codeg(n, j):
        def fn(word):
            out = {}
            for x, c in phi.mul_basis(word[j], word[j + 1]).items():
                out[word[:j] + (x,) + word[j + 2:]] = c
            return out
        return GradedMap.from_function(levels[n + 1], levels[n], p, fn)

    cofaces = [[coface(n, i) for i in range(n + 2)] for n in range(n_max)]
    codegs = [[codeg(n, j) for j in range(n + 1)] for n in range(n_max)]
    coaug = GradedMap.from_function(N.space, levels[0], p, lambda m: {(one, m): 1})
    return CosimplicialObject(levels, cofaces, codegs, p, comods, coaug, f"D_Δ({N.name})")


# ---------------------------------------------------------------- normalization

class QuotientSpace:
    """Per-degree quotient of a graded space by a graded subspace, with monomial representatives."""

    def __init__(self, ambient: GradedSpace, killed: Mapping[int, Subspace], p: int, name: str = ""):
        self.ambient = ambient
        self.killed = dict(killed)
        self.p = p
        slices = {}
        for u in ambient.degrees():
            sub = self.killed.get(u)
            piv = set(sub.pivots) if sub is not None else set()
            slices[u] = [lab for i, lab in enumerate(ambient.labels(u)) if i not in piv]
        self.space = GradedSpace(slices, ambient.max_degree, name=name, formatter=ambient.fmt)

    def project(self, elem: Mapping) -> Element:
        by_deg: Dict[int, Dict] = {}
        for lab, c in elem.items():
            by_deg.setdefault(self.ambient.degree(lab), {})[lab] = c
        out: Element = {}
        for u, part in by_deg.items():
            vec = self.ambient.to_vector(u, part)
            sub = self.killed.get(u)
            if sub is not None:
                vec = sub.residual(vec)
            for lab, c in self.ambient.from_vector(u, vec).items():
                out[lab] = c
        return out

    def projection(self) -> GradedMap:
        return GradedMap.from_function(self.ambient, self.space, self.p, lambda lab: self.project({lab: 1}))


@dataclass
class Normalization:
    alternating: CochainComplex
    kernel_model: CochainComplex
    kernel_subspaces: List[GradedSubspace]
    quotient_model: CochainComplex
    quotient_spaces: List[QuotientSpace]
    iso: ChainMap


def normalize(cos: CosimplicialObject) -> Normalization:
    """Kernel model (∩ ker s^j) and quotient model (mod Σ im d^i, i ≥ 1) with the comparison iso."""
    p = cos.p
    alt = cos.alternating_complex()
    subs: List[GradedSubspace] = []
    quots: List[QuotientSpace] = []
    for n, lv in enumerate(cos.levels):
        parts = {}
        killed = {}
        for u in lv.degrees():
            if n == 0:
                parts[u] = Subspace.full(lv.dim(u), p)
            else:
                rows = []
                for s in cos.codegeneracies[n - 1]:
                    rows.extend(s.block(u).row_vectors())
                parts[u] = kernel(SparseMatrix.from_rows(rows, lv.dim(u), p))
            if n > 0:
                cols = []
                for i in range(1, n + 1):
                    cols.extend(cos.cofaces[n - 1][i].block(u).column_vectors())
                killed[u] = Subspace.span(cols, lv.dim(u), p)
        subs.append(GradedSubspace(lv, parts, p, f"N{n}"))
        quots.append(QuotientSpace(lv, killed, p, f"Q{n}"))
    nd = []
    qd = []
    for n in range(cos.n_max):
        try:
            nd.append(restrict_corestrict(alt.d[n], subs[n], subs[n + 1]))
        except RestrictionError as exc:
            raise ComplexError(f"normalized subspace not preserved: {exc}", exc.witness) from None
        proj = quots[n + 1]
        dn = alt.d[n]
        nd_q = GradedMap.from_function(quots[n].space, quots[n + 1].space, p,
                                       lambda lab, dn=dn, proj=proj: proj.project(dn.apply({lab: 1})))
        qd.append(nd_q)
    kmodel = CochainComplex([s.space for s in subs], nd, p, f"N({cos.provenance})")
    qmodel = CochainComplex([q.space for q in quots], qd, p, f"Q({cos.provenance})")
    iso_maps = [GradedMap.from_function(subs[n].space, quots[n].space, p,
                                        lambda lab, n=n: quots[n].project(subs[n].embed_label(lab)))
                for n in range(len(subs))]
    return Normalization(alt, kmodel, subs, qmodel, quots, ChainMap(kmodel, qmodel, iso_maps, "N→Q"))


# ---------------------------------------------------------------- cotensor complexes

def cotensor_complex(M: Comodule, C: CochainComplex) -> Tuple[CochainComplex, List[GradedSubspace]]:
    """Termwise M□_Γ Cⁿ with the induced differentials."""
    if C.coactions is None:
        raise ComplexError("complex terms carry no coactions")
    p = C.p
    h = M.over
    # differentials must be comodule maps
    for n in range(C.n_max):
        cn, cn1 = C.coactions[n], C.coactions[n + 1]
        d = C.d[n]
        for lab in cn.space.all_labels():
            lhs: Dict = {}
            for (g, x), c in cn.coaction(lab).items():
                for y, c2 in d.apply({x: 1}).items():
                    lhs[(g, y)] = (lhs.get((g, y), 0) + c * c2) % p
            rhs: Dict = {}
            for y, c in d.apply({lab: 1}).items():
                elem_add(rhs, cn1.coaction(y), p, c)
            if {k: v for k, v in lhs.items() if v} != {k: v for k, v in rhs.items() if v}:
                raise ComplexError(f"differential not a comodule map at term {n}: {cn.space.fmt(lab)}", witness=(n, lab))
    subs = []
    for n, t in enumerate(C.terms):
        amb = tensor([M.space, t])
        parts = multi_cotensor_parts(amb, [M, C.coactions[n]], p)
        subs.append(GradedSubspace(amb, parts, p, f"{M.name}□C{n}"))
    diffs = []
    for n in range(C.n_max):
        lifted = GradedMap.from_function(subs[n].ambient, subs[n + 1].ambient, p,
                                         lambda w, d=C.d[n]: {(w[0], y): c for y, c in d.apply({w[1]: 1}).items()})
        diffs.append(restrict_corestrict(lifted, subs[n], subs[n + 1]))
    return CochainComplex([s.space for s in subs], diffs, p, f"{M.name}□{C.provenance}"), subs


# ---------------------------------------------------------------- cobar complex

def reduced_space(h: HopfAlgebra) -> GradedSpace:
    return GradedSpace({u: h.space.labels(u) for u in h.space.degrees() if u > 0}, h.max_degree,
                       name=f"{h.name}bar", formatter=h.fmt)


def cobar_word_formatter(M: Comodule, N: Comodule, n: int, h: HopfAlgebra):
    mt = M.space.name == "k"
    nt = N.space.name == "k"

    def fmt(word):
        m, mid, y = word[0], word[1:-1], word[-1]
        body = "[" + "|".join(h.fmt(a) for a in mid) + "]"
        return ("" if mt else M.fmt(m)) + body + ("" if nt else N.fmt(y))
    return fmt


def cobar_complex(gamma: HopfAlgebra, M: Comodule, N: Comodule, n_max: Optional[int] = None,
                  max_degree: Optional[int] = None, normalized: bool = True) -> CochainComplex:
    """Terms M⊗Γ̄^{⊗n}⊗N (or Γ^{⊗n}); d = Σ_i (-1)^i (coaction or coproduct at slot i)."""
    p = gamma.p
    D = gamma.max_degree if max_degree is None else min(max_degree, gamma.max_degree)
    if n_max is None:
        n_max = D
    if M.side != "right" or N.side != "left":
        raise ValueError("cobar_complex takes a right comodule M and a left comodule N")
    slot = reduced_space(gamma) if normalized else gamma.space
    terms = []
    for n in range(n_max + 1):
        sp = tensor([M.space] + [slot] * n + [N.space])
        slices = {u: sp.labels(u) for u in sp.degrees() if u <= D}
        terms.append(GradedSpace(slices, D, name=f"C{n}", formatter=cobar_word_formatter(M, N, n, gamma)))
    unit = gamma.unit

    def coproduct(g):
        return gamma.reduced_coproduct(g) if normalized else gamma.coproduct(g)

    def m_coact(m):
        return M.reduced_coaction(m) if normalized else M.coaction(m)

    def n_coact(y):
        return N.reduced_coaction(y) if normalized else N.coaction(y)

    def diff(n):
        def fn(word):
            out: Dict = {}
            for (m2, g), c in m_coact(word[0]).items():
                key = (m2, g) + word[1:]
                out[key] = (out.get(key, 0) + c) % p
            for i in range(1, n + 1):
                sgn = -1 if i % 2 else 1
                pre, post = word[:i], word[i + 1:]
                for (a, b), c in coproduct(word[i]).items():
                    key = pre + (a, b) + post
                    out[key] = (out.get(key, 0) + sgn * c) % p
            sgn = -1 if (n + 1) % 2 else 1
            for (g, y2), c in n_coact(word[-1]).items():
                key = word[:-1] + (g, y2)
                out[key] = (out.get(key, 0) + sgn * c) % p
            return out
        return GradedMap.from_function(terms[n], terms[n + 1], p, fn)

    diffs = [diff(n) for n in range(n_max)]
    return CochainComplex(terms, diffs, p, f"C_{gamma.name}({M.name},{N.name})")


# ---------------------------------------------------------------- Cotor

@dataclass
class CotorTable:
    """Dimensions of Cotor^s in internal degree u, with cycle representatives."""
    p: int
    s_max: int
    max_degree: int
    dims: Dict[Tuple[int, int], int]
    representatives: Dict[Tuple[int, int], List[Element]]
    complex: Optional[CochainComplex] = field(default=None, repr=False)
    label: str = ""

    def dim(self, s: int, u: int) -> int:
        return self.dims.get((s, u), 0)

    def format_element(self, s: int, elem: Element) -> str:
        fmt = self.complex.terms[s].fmt if self.complex is not None else str
        parts = []
        for lab, c in sorted(elem.items(), key=lambda kv: self.complex.terms[s].index(kv[0]) if self.complex else 0):
            parts.append(fmt(lab) if c == 1 else f"{c}*{fmt(lab)}")
        return " + ".join(parts) if parts else "0"

    def format_representative(self, s: int, u: int, i: int = 0) -> str:
        return self.format_element(s, self.representatives[(s, u)][i])

    def rows(self):
        """(s, t, u, dim, flags) rows for charts; t = 0 for a single grading."""
        return [(s, 0, u, d, "") for (s, u), d in sorted(self.dims.items())]


def cotor(gamma: HopfAlgebra, M: Comodule, N: Comodule, s_max: int, max_degree: Optional[int] = None) -> CotorTable:
    D = gamma.max_degree if max_degree is None else min(max_degree, gamma.max_degree)
    cx = cobar_complex(gamma, M, N, n_max=s_max + 1, max_degree=D)
    dims = {}
    reps = {}
    for s in range(s_max + 1):
        for u in cx.terms[s].degrees():
            h = cx.homology(s, u)
            if h.dim:
                dims[(s, u)] = h.dim
                reps[(s, u)] = [cx.element(s, u, r) for r in h.representatives]
    return CotorTable(gamma.p, s_max, D, dims, reps, cx, f"Cotor_{gamma.name}({M.name},{N.name})")


# ---------------------------------------------------------------- change of rings

def extended_comodule(quot: HopfQuotient, N: Comodule, name: str = "") -> Tuple[Comodule, GradedSubspace]:
    """Γ□_Σ N as a left Γ-comodule (Δ on the Γ factor); N is a left Σ-comodule."""
    gamma = quot.gamma
    p = gamma.p
    right = Comodule(quot.sigma, gamma.space, quot.right_sigma_coaction, "right", gamma.name)
    amb = tensor([gamma.space, N.space])
    sub = GradedSubspace(amb, multi_cotensor_parts(amb, [right, N], p), p, name or f"Γ□{N.name}")
    whole = Comodule(gamma, amb, lambda w: {(a, (b, w[1])): c for (a, b), c in gamma.coproduct(w[0]).items()},
                     "left", amb.name)
    return subcomodule(whole, sub, sub.space.name), sub


@dataclass
class ChangeOfRings:
    source: CochainComplex
    target: CochainComplex
    chain_map: ChainMap
    extended: GradedSubspace


def change_of_rings(quot: HopfQuotient, N: Comodule, s_max: int, max_degree: Optional[int] = None) -> ChangeOfRings:
    """C_Γ(k, Γ□_Σ N) → C_Σ(k, N), [a₁|…|a_n](γ⊗ν) ↦ ε(γ)[q a₁|…|q a_n]ν."""
    gamma, sigma = quot.gamma, quot.sigma
    p = gamma.p
    ext, sub = extended_comodule(quot, N)
    kg = Comodule.trivial(gamma, "right")
    ks = Comodule.trivial(sigma, "right")
    src = cobar_complex(gamma, kg, ext, n_max=s_max + 1, max_degree=max_degree)
    tgt = cobar_complex(sigma, ks, N, n_max=s_max + 1, max_degree=max_degree)
    unit = gamma.unit

    def fn(word):
        mids = word[1:-1]
        qs = []
        for a in mids:
            s = quot.image(a)
            if s is None:
                return {}
            qs.append(s)
        out: Dict = {}
        for (g, y), c in sub.embed_label(word[-1]).items():
            if g == unit:
                key = ((),) + tuple(qs) + (y,)
                out[key] = (out.get(key, 0) + c) % p
        return out

    maps = [GradedMap.from_function(src.terms[n], tgt.terms[n], p, fn) for n in range(s_max + 2)]
    return ChangeOfRings(src, tgt, ChainMap(src, tgt, maps, "change of rings"), sub)
