"""Monomial Hopf algebras over F_p, comodules, cotensor products.

Basis elements of a Hopf algebra are exponent tuples in the generator
order of the presentation.  Odd-degree elements obey the Koszul rule:
moving x past y costs (-1)^{|x||y|}.  This is what makes exterior
generators at odd primes honest Hopf algebras.
"""
from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from .fplin import PrimeField, SparseMatrix, Subspace, kernel
from .graded import Element, GradedMap, GradedSpace, GradedSubspace, elem_add, tensor

Monomial = Tuple[int, ...]


class PresentationError(ValueError):
    pass


class AxiomError(ValueError):
    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class QuotientError(ValueError):
    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class ClosureError(ValueError):
    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


def koszul(d1: int, d2: int) -> int:
    """Sign for swapping homogeneous elements of degrees d1, d2."""
    return -1 if (d1 & 1) and (d2 & 1) else 1


# ---------------------------------------------------------------- presentations

@dataclass(frozen=True)
class Generator:
    name: str
    degree: int
    height: Optional[int] = None  # None means polynomial


@dataclass
class Presentation:
    p: int
    max_degree: int
    generators: Tuple[Generator, ...]
    coproducts: Dict[str, Tuple[Tuple[int, str, str], ...]]
    quotients: Dict[str, Tuple[str, ...]] = field(default_factory=dict)
    name: str = ""

    FORMAT = "hopfss-presentation/1"

    def to_json(self) -> str:
        doc = {
            "format": self.FORMAT,
            "name": self.name,
            "p": self.p,
            "max_degree": self.max_degree,
            "generators": [{"name": g.name, "degree": g.degree, "height": g.height}
                           for g in self.generators],
            "coproducts": {k: [list(t) for t in v] for k, v in self.coproducts.items()},
            "quotients": {k: list(v) for k, v in self.quotients.items()},
        }
        return json.dumps(doc, indent=2, sort_keys=True, ensure_ascii=False) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "Presentation":
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise PresentationError(f"malformed presentation: {exc}") from None
        if not isinstance(doc, dict) or doc.get("format") != cls.FORMAT:
            raise PresentationError(f"presentation must declare format {cls.FORMAT!r}")
        try:
            gens = tuple(Generator(str(g["name"]), int(g["degree"]),
                                   None if g.get("height") is None else int(g["height"]))
                         for g in doc["generators"])
            cop = {str(k): tuple((int(c), str(l), str(r)) for c, l, r in v)
                   for k, v in doc.get("coproducts", {}).items()}
            quo = {str(k): tuple(str(x) for x in v) for k, v in doc.get("quotients", {}).items()}
            return cls(int(doc["p"]), int(doc["max_degree"]), gens, cop, quo, str(doc.get("name", "")))
        except (KeyError, TypeError, ValueError) as exc:
            raise PresentationError(f"malformed presentation: {exc}") from None

    def with_window(self, max_degree: int) -> "Presentation":
        return Presentation(self.p, max_degree, self.generators, self.coproducts, self.quotients, self.name)


_TOKEN = re.compile(r"^([A-Za-z_][A-Za-z_0-9]*)(?:\^(\d+))?$")


def parse_monomial(text: str, names: Sequence[str]) -> Dict[str, int]:
    text = text.strip()
    if text == "1":
        return {}
    out: Dict[str, int] = {}
    for tok in text.split("*"):
        m = _TOKEN.match(tok.strip())
        if not m or m.group(1) not in names:
            raise PresentationError(f"cannot parse monomial factor {tok!r} in {text!r}")
        e = int(m.group(2) or 1)
        if e < 1:
            raise PresentationError(f"exponent must be positive in {text!r}")
        out[m.group(1)] = out.get(m.group(1), 0) + e
    return out


def _is_valid_height(h, p):
    if h is None or h == 2:
        return True
    q = p
    while q < h:
        q *= p
    return q == h


# ---------------------------------------------------------------- Hopf algebras

class HopfAlgebra:
    """Connected monomial Hopf algebra truncated at internal degree D."""

    def __init__(self, presentation: Presentation, name: str = ""):
        pres = presentation
        self.presentation = pres
        self.field = PrimeField(pres.p)
        self.p = pres.p
        self.max_degree = D = pres.max_degree
        self.name = name or pres.name or "Γ"
        names = [g.name for g in pres.generators]
        if len(set(names)) != len(names):
            raise PresentationError("duplicate generator names")
        for g in pres.generators:
            if g.degree < 1:
                raise PresentationError(f"generator {g.name} must have positive degree")
            if not _is_valid_height(g.height, pres.p):
                raise PresentationError(f"height of {g.name} must be 2, a power of p, or polynomial")
        self.generators = tuple(g for g in pres.generators if g.degree <= D)
        self.gen_names = tuple(g.name for g in self.generators)
        self._gpos = {n: i for i, n in enumerate(self.gen_names)}
        self._gdeg = tuple(g.degree for g in self.generators)
        self._godd = tuple(g.degree % 2 == 1 for g in self.generators)
        self._cap = tuple(g.height if g.height is not None else D // g.degree + 1
                          for g in self.generators)
        self._deg_cache: Dict[Monomial, int] = {}
        self.unit: Monomial = tuple(0 for _ in self.generators)
        self.space = self._enumerate_basis()
        self._gen_coproduct: Dict[int, Dict[Tuple[Monomial, Monomial], int]] = {}
        for i, g in enumerate(self.generators):
            terms = pres.coproducts.get(g.name)
            if terms is None:
                terms = ((1, g.name, "1"), (1, "1", g.name))
            acc: Dict[Tuple[Monomial, Monomial], int] = {}
            for c, left, right in terms:
                l = self._mono_from_dict(parse_monomial(left, names))
                r = self._mono_from_dict(parse_monomial(right, names))
                if l is None or r is None:
                    continue
                if self.degree(l) + self.degree(r) != g.degree:
                    raise PresentationError(f"coproduct of {g.name} is not homogeneous")
                key = (l, r)
                acc[key] = (acc.get(key, 0) + c) % self.p
            self._gen_coproduct[i] = {k: v for k, v in acc.items() if v}
        self._coprod_cache: Dict[Monomial, Dict[Tuple[Monomial, Monomial], int]] = {}
        self._reduced_cache: Dict[Monomial, Dict[Tuple[Monomial, Monomial], int]] = {}
        self._antipode_cache: Dict[Monomial, Element] = {}
        self._mul_cache: Dict[Tuple[Monomial, Monomial], Optional[Tuple[Monomial, int]]] = {}

    # basis
    def _mono_from_dict(self, d: Mapping[str, int]) -> Optional[Monomial]:
        exps = [0] * len(self.generators)
        for n, e in d.items():
            if n not in self._gpos:
                return None  # generator above the window
            exps[self._gpos[n]] = e
        m = tuple(exps)
        if any(e >= c for e, c in zip(m, self._cap)) or self.degree(m) > self.max_degree:
            return None
        return m

    def monomial(self, text: str) -> Monomial:
        m = self._mono_from_dict(parse_monomial(text, [g.name for g in self.presentation.generators]))
        if m is None:
            raise PresentationError(f"monomial {text!r} vanishes in the window")
        return m

    def _enumerate_basis(self) -> GradedSpace:
        D = self.max_degree
        slices: Dict[int, List[Monomial]] = {}

        def rec(i, cur, deg):
            if i == len(self.generators):
                slices.setdefault(deg, []).append(tuple(cur))
                return
            e = 0
            while e < self._cap[i] and deg + e * self._gdeg[i] <= D:
                cur.append(e)
                rec(i + 1, cur, deg + e * self._gdeg[i])
                cur.pop()
                e += 1

        rec(0, [], 0)
        ordered = {u: sorted(v) for u, v in sorted(slices.items())}
        return GradedSpace(ordered, D, name=self.name, formatter=self.fmt)

    def degree(self, m: Monomial) -> int:
        d = self._deg_cache.get(m)
        if d is None:
            d = self._deg_cache[m] = sum(e * d for e, d in zip(m, self._gdeg))
        return d

    def is_odd(self, m: Monomial) -> bool:
        return self.degree(m) % 2 == 1

    def fmt(self, m: Monomial) -> str:
        parts = []
        for n, e in zip(self.gen_names, m):
            if e == 1:
                parts.append(n)
            elif e > 1:
                parts.append(f"{n}^{e}")
        return "*".join(parts) if parts else "1"

    def basis(self) -> List[Monomial]:
        return list(self.space.all_labels())

    # algebra
    def mul_basis(self, a: Monomial, b: Monomial) -> Optional[Tuple[Monomial, int]]:
        key = (a, b)
        if key in self._mul_cache:
            return self._mul_cache[key]
        res = None
        c = tuple(x + y for x, y in zip(a, b))
        if all(e < cap for e, cap in zip(c, self._cap)) and self.degree(c) <= self.max_degree:
            # sort b's generators into a: cross pairs (i in a, j in b, i > j), both odd
            n = 0
            odd = self._godd
            for j, bj in enumerate(b):
                if bj and odd[j]:
                    for i in range(j + 1, len(a)):
                        if a[i] and odd[i]:
                            n += a[i] * bj
            res = (c, -1 if n % 2 else 1)
        self._mul_cache[key] = res
        return res

    def mul(self, x: Mapping[Monomial, int], y: Mapping[Monomial, int]) -> Element:
        p = self.p
        out: Element = {}
        for a, ca in x.items():
            for b, cb in y.items():
                r = self.mul_basis(a, b)
                if r is not None:
                    m, s = r
                    out[m] = (out.get(m, 0) + s * ca * cb) % p
        return {k: v for k, v in out.items() if v}

    def tensor_mul(self, x: Mapping[Tuple[Monomial, Monomial], int],
                   y: Mapping[Tuple[Monomial, Monomial], int]) -> Dict[Tuple[Monomial, Monomial], int]:
        """Product in Γ⊗Γ: (a⊗b)(c⊗d) = (-1)^{|b||c|} ac⊗bd."""
        p = self.p
        out: Dict = {}
        for (a, b), c1 in x.items():
            db = self.degree(b)
            for (c, d), c2 in y.items():
                r1 = self.mul_basis(a, c)
                if r1 is None:
                    continue
                r2 = self.mul_basis(b, d)
                if r2 is None:
                    continue
                s = r1[1] * r2[1] * koszul(db, self.degree(c))
                key = (r1[0], r2[0])
                out[key] = (out.get(key, 0) + s * c1 * c2) % p
        return {k: v for k, v in out.items() if v}

    def counit(self, m: Monomial) -> int:
        return 1 if m == self.unit else 0

    # coalgebra
    def coproduct(self, m: Monomial) -> Dict[Tuple[Monomial, Monomial], int]:
        cached = self._coprod_cache.get(m)
        if cached is not None:
            return cached
        if m == self.unit:
            res = {(m, m): 1}
        else:
            i = next(k for k, e in enumerate(m) if e)
            rest = list(m)
            rest[i] -= 1
            res = self.tensor_mul(self._gen_coproduct[i], self.coproduct(tuple(rest)))
        self._coprod_cache[m] = res
        return res

    def reduced_coproduct(self, m: Monomial) -> Dict[Tuple[Monomial, Monomial], int]:
        cached = self._reduced_cache.get(m)
        if cached is None:
            u = self.unit
            cached = {k: v for k, v in self.coproduct(m).items() if k[0] != u and k[1] != u}
            self._reduced_cache[m] = cached
        return cached

    def antipode(self, m: Monomial) -> Element:
        cached = self._antipode_cache.get(m)
        if cached is not None:
            return cached
        p = self.p
        if m == self.unit:
            res = {m: 1}
        else:
            acc: Element = {}
            dm = self.degree(m)
            for (l, r), c in self.coproduct(m).items():
                if l == m and r == self.unit:
                    continue
                if self.degree(l) >= dm:
                    raise AxiomError(f"axiom failure: counit at degree {dm} ({self.fmt(m)})")
                elem_add(acc, self.mul(self.antipode(l), {r: 1}), p, c)
            res = {k: (-v) % p for k, v in acc.items() if v % p}
        self._antipode_cache[m] = res
        return res

    def element_coproduct(self, x: Mapping[Monomial, int]) -> Dict[Tuple[Monomial, Monomial], int]:
        out: Dict = {}
        for m, c in x.items():
            elem_add(out, self.coproduct(m), self.p, c)
        return out

    def __repr__(self):
        return f"HopfAlgebra({self.name}, p={self.p}, D={self.max_degree}, dim={self.space.total_dim})"


def build_monomial_hopf(presentation: Presentation, name: str = "", check: bool = True) -> HopfAlgebra:
    h = HopfAlgebra(presentation, name)
    if check:
        rep = validate(h)
        if not rep.ok:
            f = rep.first_failure()
            raise AxiomError(f"axiom failure: {f.name} at degree {f.degree} ({f.witness})", rep)
    return h


# ---------------------------------------------------------------- validation reports

@dataclass
class Check:
    name: str
    passed: bool
    degree: Optional[int] = None
    witness: Optional[str] = None


@dataclass
class ValidationReport:
    subject: str
    checks: List[Check] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks)

    def first_failure(self) -> Optional[Check]:
        return next((c for c in self.checks if not c.passed), None)

    def add(self, name, failure=None):
        if failure is None:
            self.checks.append(Check(name, True))
        else:
            deg, wit = failure
            self.checks.append(Check(name, False, deg, wit))

    def lines(self) -> List[str]:
        out = []
        for c in self.checks:
            if c.passed:
                out.append(f"PASS {c.name}")
            else:
                out.append(f"FAIL {c.name} at degree {c.degree}: {c.witness}")
        return out


def _first(items, pred):
    for deg, item in items:
        bad = pred(item)
        if bad:
            return deg, bad
    return None


def _tensor_fmt(h, word):
    return "⊗".join(h.fmt(x) if isinstance(x, tuple) and len(x) == len(h.unit) else str(x) for x in word)


def _clean(d, p):
    return {k: v % p for k, v in d.items() if v % p}


def _validate_hopf(h: HopfAlgebra) -> ValidationReport:
    p = h.p
    rep = ValidationReport(f"Hopf algebra {h.name}")
    basis = [(h.degree(m), m) for m in h.basis()]
    u = h.unit
    rep.add("connected", None if h.space.dim(0) == 1 else (0, "degree 0 is not spanned by 1"))

    def counit_left(m):
        acc: Element = {}
        for (a, b), c in h.coproduct(m).items():
            if a == u:
                acc[b] = (acc.get(b, 0) + c) % p
        return None if _clean(acc, p) == {m: 1} else f"(ε⊗id)Δ({h.fmt(m)}) ≠ {h.fmt(m)}"

    def counit_right(m):
        acc: Element = {}
        for (a, b), c in h.coproduct(m).items():
            if b == u:
                acc[a] = (acc.get(a, 0) + c) % p
        return None if _clean(acc, p) == {m: 1} else f"(id⊗ε)Δ({h.fmt(m)}) ≠ {h.fmt(m)}"

    def coassoc(m):
        left: Dict = {}
        right: Dict = {}
        for (a, b), c in h.coproduct(m).items():
            for (a1, a2), c2 in h.coproduct(a).items():
                k = (a1, a2, b)
                left[k] = (left.get(k, 0) + c * c2) % p
            for (b1, b2), c2 in h.coproduct(b).items():
                k = (a, b1, b2)
                right[k] = (right.get(k, 0) + c * c2) % p
        return None if _clean(left, p) == _clean(right, p) else f"(Δ⊗id)Δ ≠ (id⊗Δ)Δ on {h.fmt(m)}"

    rep.add("counit (ε⊗id)Δ = id", _first(basis, counit_left))
    rep.add("counit (id⊗ε)Δ = id", _first(basis, counit_right))
    rep.add("coassociativity", _first(basis, coassoc))

    pairs = [(da + db, (a, b)) for da, a in basis for db, b in basis if da + db <= h.max_degree]
    pairs.sort(key=lambda t: t[0])

    def unit_law(m):
        ok = h.mul({u: 1}, {m: 1}) == {m: 1} and h.mul({m: 1}, {u: 1}) == {m: 1}
        return None if ok else f"1·{h.fmt(m)} ≠ {h.fmt(m)}"

    def assoc(ab):
        a, b = ab
        for dc, c in basis:
            if h.degree(a) + h.degree(b) + dc > h.max_degree:
                break
            if h.mul(h.mul({a: 1}, {b: 1}), {c: 1}) != h.mul({a: 1}, h.mul({b: 1}, {c: 1})):
                return f"({h.fmt(a)}·{h.fmt(b)})·{h.fmt(c)} ≠ {h.fmt(a)}·({h.fmt(b)}·{h.fmt(c)})"
        return None

    def multiplicative(ab):
        a, b = ab
        lhs = h.element_coproduct(h.mul({a: 1}, {b: 1}))
        rhs = h.tensor_mul(h.coproduct(a), h.coproduct(b))
        return None if _clean(lhs, p) == _clean(rhs, p) else f"Δ({h.fmt(a)}·{h.fmt(b)}) ≠ Δ({h.fmt(a)})Δ({h.fmt(b)})"

    def counit_mult(ab):
        a, b = ab
        prod = h.mul({a: 1}, {b: 1})
        lhs = prod.get(u, 0)
        return None if lhs % p == (h.counit(a) * h.counit(b)) % p else f"ε({h.fmt(a)}·{h.fmt(b)})"

    rep.add("unit", _first(basis, unit_law))
    rep.add("associativity", _first(pairs, assoc))
    rep.add("Δ is an algebra map", _first(pairs, multiplicative))
    rep.add("ε is an algebra map", _first(pairs, counit_mult))

    def antipode_side(m, left: bool):
        try:
            acc: Element = {}
            for (a, b), c in h.coproduct(m).items():
                term = h.mul(h.antipode(a), {b: 1}) if left else h.mul({a: 1}, h.antipode(b))
                elem_add(acc, term, p, c)
        except AxiomError as exc:
            return str(exc)
        want = {u: 1} if m == u else {}
        return None if _clean(acc, p) == want else f"μ({'c⊗id' if left else 'id⊗c'})Δ({h.fmt(m)}) ≠ ηε"

    rep.add("antipode μ(c⊗id)Δ = ηε", _first(basis, lambda m: antipode_side(m, True)))
    rep.add("antipode μ(id⊗c)Δ = ηε", _first(basis, lambda m: antipode_side(m, False)))
    return rep


def validate(obj) -> ValidationReport:
    if isinstance(obj, HopfAlgebra):
        return _validate_hopf(obj)
    if isinstance(obj, ComoduleAlgebra):
        return obj.validate()
    if isinstance(obj, Comodule):
        return obj.validate()
    raise TypeError(f"cannot validate {type(obj).__name__}")


# ---------------------------------------------------------------- comodules

class Comodule:
    """Graded comodule over a HopfAlgebra.

    Left coaction values are dicts {(g, m): c}; right ones {(m, g): c}.
    """

    def __init__(self, over: HopfAlgebra, space: GradedSpace,
                 coaction: Callable[[object], Mapping], side: str = "left", name: str = ""):
        if side not in ("left", "right"):
            raise ValueError("side must be 'left' or 'right'")
        self.over = over
        self.space = space
        self.side = side
        self.name = name or space.name
        self.p = over.p
        self._coaction_fn = coaction
        self._cache: Dict = {}

    def coaction(self, label) -> Dict:
        c = self._cache.get(label)
        if c is None:
            c = {k: v % self.p for k, v in self._coaction_fn(label).items() if v % self.p}
            self._cache[label] = c
        return c

    def reduced_coaction(self, label) -> Dict:
        u = self.over.unit
        if self.side == "left":
            return {k: v for k, v in self.coaction(label).items() if k[0] != u}
        return {k: v for k, v in self.coaction(label).items() if k[1] != u}

    def degree(self, label) -> int:
        return self.space.degree(label)

    def fmt(self, label) -> str:
        return self.space.fmt(label)

    # constructors
    @classmethod
    def trivial(cls, over: HopfAlgebra, side: str = "left") -> "Comodule":
        space = GradedSpace.unit(over.max_degree)
        u = over.unit
        if side == "left":
            return cls(over, space, lambda _l: {(u, ()): 1}, side, "k")
        return cls(over, space, lambda _l: {((), u): 1}, side, "k")

    @classmethod
    def regular(cls, over: HopfAlgebra, side: str = "left") -> "Comodule":
        return cls(over, over.space, over.coproduct, side, over.name)

    @classmethod
    def on_space(cls, over: HopfAlgebra, space: GradedSpace, table: Mapping, side="left", name=""):
        return cls(over, space, lambda lab: table[lab], side, name)

    def validate(self) -> ValidationReport:
        h = self.over
        p = self.p
        u = h.unit
        rep = ValidationReport(f"{self.side} comodule {self.name} over {h.name}")
        basis = [(self.degree(m), m) for m in self.space.all_labels()]

        def counit(m):
            acc: Dict = {}
            for k, c in self.coaction(m).items():
                g, x = (k[0], k[1]) if self.side == "left" else (k[1], k[0])
                if g == u:
                    acc[x] = (acc.get(x, 0) + c) % p
            return None if _clean(acc, p) == {m: 1} else f"counit fails on {self.fmt(m)}"

        def coassoc(m):
            lhs: Dict = {}
            rhs: Dict = {}
            for k, c in self.coaction(m).items():
                if self.side == "left":
                    g, x = k
                    for (g1, g2), c2 in h.coproduct(g).items():
                        key = (g1, g2, x)
                        lhs[key] = (lhs.get(key, 0) + c * c2) % p
                    for (g2, x2), c2 in self.coaction(x).items():
                        key = (g, g2, x2)
                        rhs[key] = (rhs.get(key, 0) + c * c2) % p
                else:
                    x, g = k
                    for (g1, g2), c2 in h.coproduct(g).items():
                        key = (x, g1, g2)
                        lhs[key] = (lhs.get(key, 0) + c * c2) % p
                    for (x2, g1), c2 in self.coaction(x).items():
                        key = (x2, g1, g)
                        rhs[key] = (rhs.get(key, 0) + c * c2) % p
            return None if _clean(lhs, p) == _clean(rhs, p) else f"coassociativity fails on {self.fmt(m)}"

        rep.add("comodule counit", _first(basis, counit))
        rep.add("comodule coassociativity", _first(basis, coassoc))
        return rep

    def __repr__(self):
        return f"Comodule({self.name}, {self.side} over {self.over.name})"


def diagonal_tensor(factors: Sequence[Comodule], name: str = "") -> Comodule:
    """Left comodule structure on a tensor product via the diagonal coaction.

    ψ(m₁⊗…⊗m_k) = Σ ± m₁′…m_k′ ⊗ m₁″⊗…⊗m_k″, the sign recording each
    m_i″ moving past m_j′ for j > i.
    """
    h = factors[0].over
    p = h.p
    if any(f.side != "left" for f in factors):
        raise ValueError("diagonal_tensor takes left comodules")
    space = tensor([f.space for f in factors], name=name)

    def coact(word):
        acc: Dict[Tuple, int] = {(h.unit, ()): 1}
        for f, lab in zip(factors, word):
            nxt: Dict[Tuple, int] = {}
            for (g, rest), c in acc.items():
                drest = sum(fac.degree(x) for fac, x in zip(factors, rest))
                for (g2, x2), c2 in f.coaction(lab).items():
                    r = h.mul_basis(g, g2)
                    if r is None:
                        continue
                    s = r[1] * koszul(drest, h.degree(g2))
                    key = (r[0], rest + (x2,))
                    nxt[key] = (nxt.get(key, 0) + s * c * c2) % p
            acc = {k: v for k, v in nxt.items() if v}
        return acc

    return Comodule(h, space, coact, "left", name or space.name)


def positive_part_quotient(m: Comodule, name: str = "") -> Comodule:
    """M / M_0: the coker-of-unit model (Φ̄ as a comodule)."""
    slices = {u: m.space.labels(u) for u in m.space.degrees() if u > 0}
    space = GradedSpace(slices, m.space.max_degree, name=name or f"{m.name}bar", formatter=m.space.fmt)

    def coact(lab):
        return {k: c for k, c in m.coaction(lab).items() if m.degree(k[1]) > 0}

    return Comodule(m.over, space, coact, "left", space.name)


def subcomodule(m: Comodule, sub: GradedSubspace, name: str = "") -> Comodule:
    """Restriction of a left comodule to an invariant subspace."""
    p = m.p
    if m.side != "left":
        raise ValueError("subcomodule expects a left comodule")

    def coact(lab):
        by_g: Dict = {}
        for x, c in sub.embed_label(lab).items():
            for (g, y), c2 in m.coaction(x).items():
                d = by_g.setdefault(g, {})
                d[y] = (d.get(y, 0) + c * c2) % p
        out = {}
        for g, part in by_g.items():
            try:
                coords = sub.coordinates(part)
            except ValueError:
                raise ClosureError(f"not a subcomodule: coaction of {sub.space.fmt(lab)} leaves the subspace",
                                   witness=lab) from None
            for y, c in coords.items():
                out[(g, y)] = c
        return out

    return Comodule(m.over, sub.space, coact, "left", name or sub.space.name)


# ---------------------------------------------------------------- quotients

class HopfQuotient:
    """A monomial quotient q: Γ → Σ = Γ/I, I generated by killed monomials."""

    def __init__(self, gamma: HopfAlgebra, sigma: HopfAlgebra, killed: Tuple[str, ...]):
        self.gamma = gamma
        self.sigma = sigma
        self.killed = killed
        self._image: Dict[Monomial, Optional[Monomial]] = {}
        spos = {n: i for i, n in enumerate(sigma.gen_names)}
        for m in gamma.basis():
            exps = [0] * len(sigma.generators)
            ok = True
            for n, e in zip(gamma.gen_names, m):
                if not e:
                    continue
                if n not in spos or e >= sigma._cap[spos[n]]:
                    ok = False
                    break
                exps[spos[n]] = e
            self._image[m] = tuple(exps) if ok else None
        self._lift = {v: k for k, v in self._image.items() if v is not None}

    def image(self, m: Monomial) -> Optional[Monomial]:
        return self._image[m]

    def in_kernel(self, m: Monomial) -> bool:
        return self._image[m] is None

    def lift(self, s: Monomial) -> Monomial:
        return self._lift[s]

    def apply(self, x: Mapping[Monomial, int]) -> Element:
        out: Element = {}
        for m, c in x.items():
            s = self._image[m]
            if s is not None:
                out[s] = (out.get(s, 0) + c) % self.gamma.p
        return {k: v for k, v in out.items() if v}

    def graded_map(self) -> GradedMap:
        return GradedMap.from_function(self.gamma.space, self.sigma.space, self.gamma.p,
                                       lambda m: {} if self._image[m] is None else {self._image[m]: 1})

    def right_sigma_coaction(self, m: Monomial) -> Dict:
        """(id⊗q)Δ."""
        out: Dict = {}
        for (a, b), c in self.gamma.coproduct(m).items():
            s = self._image[b]
            if s is not None:
                out[(a, s)] = (out.get((a, s), 0) + c) % self.gamma.p
        return {k: v for k, v in out.items() if v}

    def left_sigma_coaction(self, m: Monomial) -> Dict:
        """(q⊗id)Δ."""
        out: Dict = {}
        for (a, b), c in self.gamma.coproduct(m).items():
            s = self._image[a]
            if s is not None:
                out[(s, b)] = (out.get((s, b), 0) + c) % self.gamma.p
        return {k: v for k, v in out.items() if v}

    def push(self, m: Comodule) -> Comodule:
        """Corestrict a Γ-comodule to a Σ-comodule via q."""
        img = self._image
        p = self.gamma.p
        if m.side == "left":
            def coact(lab):
                out: Dict = {}
                for (g, x), c in m.coaction(lab).items():
                    s = img[g]
                    if s is not None:
                        out[(s, x)] = (out.get((s, x), 0) + c) % p
                return out
        else:
            def coact(lab):
                out: Dict = {}
                for (x, g), c in m.coaction(lab).items():
                    s = img[g]
                    if s is not None:
                        out[(x, s)] = (out.get((x, s), 0) + c) % p
                return out
        return Comodule(self.sigma, m.space, coact, m.side, m.name)


def quotient_hopf(gamma: HopfAlgebra, killed: Sequence[str], name: str = "Σ") -> Tuple[HopfAlgebra, HopfQuotient]:
    pres = gamma.presentation
    all_names = [g.name for g in pres.generators]
    removed = set()
    heights = {g.name: g.height for g in pres.generators}
    for k in killed:
        d = parse_monomial(k, all_names)
        if len(d) != 1:
            raise QuotientError(f"killed element {k!r} must be a generator or a generator power")
        (n, e), = d.items()
        if e == 1:
            removed.add(n)
        else:
            h = heights[n]
            heights[n] = e if h is None else min(h, e)
    gens = tuple(Generator(g.name, g.degree, heights[g.name]) for g in pres.generators if g.name not in removed)
    # reduce the coproduct formulas along the quotient
    kept = {g.name: g for g in gens}

    def survives(text):
        d = parse_monomial(text, all_names)
        for n, e in d.items():
            if n not in kept:
                return False
            h = kept[n].height
            if h is not None and e >= h:
                return False
        return True

    cop = {}
    for g in gens:
        terms = pres.coproducts.get(g.name, ((1, g.name, "1"), (1, "1", g.name)))
        cop[g.name] = tuple(t for t in terms if survives(t[1]) and survives(t[2]))
    spres = Presentation(pres.p, pres.max_degree, gens, cop, {}, name)
    sigma = HopfAlgebra(spres, name)
    quot = HopfQuotient(gamma, sigma, tuple(killed))
    p = gamma.p
    # coideal and antipode stability, then q is a Hopf map
    for m in gamma.basis():
        if not quot.in_kernel(m):
            continue
        for (a, b), c in gamma.coproduct(m).items():
            if not (quot.in_kernel(a) or quot.in_kernel(b)):
                raise QuotientError(f"not a Hopf quotient: Δ({gamma.fmt(m)}) has term "
                                    f"{gamma.fmt(a)}⊗{gamma.fmt(b)} outside I⊗Γ+Γ⊗I", witness=m)
        if quot.apply(gamma.antipode(m)):
            raise QuotientError(f"not a Hopf quotient: c({gamma.fmt(m)}) ∉ I", witness=m)
    for m in gamma.basis():
        lhs: Dict = {}
        for (a, b), c in gamma.coproduct(m).items():
            sa, sb = quot.image(a), quot.image(b)
            if sa is not None and sb is not None:
                lhs[(sa, sb)] = (lhs.get((sa, sb), 0) + c) % p
        s = quot.image(m)
        rhs = sigma.coproduct(s) if s is not None else {}
        if _clean(lhs, p) != rhs:
            raise QuotientError(f"not a Hopf quotient: q is not a coalgebra map at {gamma.fmt(m)}", witness=m)
    rep = validate(sigma)
    if not rep.ok:
        f = rep.first_failure()
        raise QuotientError(f"not a Hopf quotient: Σ fails {f.name} at degree {f.degree}")
    return sigma, quot


# ---------------------------------------------------------------- cotensor

class CotensorSubspace(GradedSubspace):
    def __init__(self, ambient, parts, p, left, right, name=""):
        super().__init__(ambient, parts, p, name)
        self.left = left
        self.right = right


def _right_coact(x):
    return x.coaction


def cotensor(m: Comodule, n: Comodule, name: str = "") -> CotensorSubspace:
    """Degreewise kernel of ψ_M⊗id − id⊗ψ_N inside M⊗N."""
    if m.side != "right" or n.side != "left":
        raise ValueError("cotensor takes a right and a left comodule")
    if m.over is not n.over:
        raise ValueError("comodules over different Hopf algebras")
    amb = tensor([m.space, n.space], name=name or f"{m.name}□{n.name}")
    parts = multi_cotensor_parts(amb, [m, n], m.p)
    return CotensorSubspace(amb, parts, m.p, m, n, name or amb.name)


class Bicoaction:
    """Adapter: a space with optional left and right coactions over one Hopf algebra."""

    def __init__(self, space: GradedSpace, left=None, right=None, name=""):
        self.space = space
        self.left = left
        self.right = right
        self.name = name or space.name


def _coactions(obj):
    if isinstance(obj, Comodule):
        return (obj.coaction if obj.side == "left" else None,
                obj.coaction if obj.side == "right" else None)
    return obj.left, obj.right


def multi_cotensor_parts(amb: GradedSpace, factors: Sequence, p: int) -> Dict[int, Subspace]:
    """Per-degree kernel of all adjacent cotensor conditions in f₁⊗…⊗f_k."""
    k = len(factors)
    coacts = [_coactions(f) for f in factors]
    parts = {}
    for u in amb.degrees():
        labels = amb.labels(u)
        cols = []
        tindex: Dict = {}
        for word in labels:
            img: Dict = {}
            for i in range(k - 1):
                right = coacts[i][1]
                left = coacts[i + 1][0]
                pre, x, y, post = word[:i], word[i], word[i + 1], word[i + 2:]
                for (x2, g), c in right(x).items():
                    key = (i, pre + (x2, g, y) + post)
                    img[key] = (img.get(key, 0) + c) % p
                for (g, y2), c in left(y).items():
                    key = (i, pre + (x, g, y2) + post)
                    img[key] = (img.get(key, 0) - c) % p
            vec = {}
            for key, c in img.items():
                if c:
                    j = tindex.setdefault(key, len(tindex))
                    vec[j] = c
            cols.append(vec)
        m = SparseMatrix.from_columns(cols, len(tindex), p)
        parts[u] = kernel(m)
    return parts


def multi_cotensor(factors: Sequence, p: int, name: str = "") -> GradedSubspace:
    amb = tensor([f.space for f in factors], name=name)
    return GradedSubspace(amb, multi_cotensor_parts(amb, factors, p), p, name or amb.name)


# ---------------------------------------------------------------- Φ and G

class ComoduleAlgebra:
    """A left Γ-comodule with a compatible product, realised inside Γ."""

    def __init__(self, comodule: Comodule, sub: GradedSubspace, gamma: HopfAlgebra, name: str = "Φ"):
        self.comodule = comodule
        self.sub = sub
        self.gamma = gamma
        self.name = name
        self.space = comodule.space
        self.p = gamma.p
        self.unit = gamma.unit
        self._mul_cache: Dict = {}

    def mul_basis(self, a, b) -> Element:
        key = (a, b)
        r = self._mul_cache.get(key)
        if r is None:
            prod = self.gamma.mul(self.sub.embed_label(a), self.sub.embed_label(b))
            try:
                r = self.sub.coordinates(prod)
            except ValueError:
                raise ClosureError(f"not multiplicatively closed: {self.space.fmt(a)}·{self.space.fmt(b)}",
                                   witness=(a, b)) from None
            self._mul_cache[key] = r
        return r

    def mul(self, x, y) -> Element:
        out: Element = {}
        for a, ca in x.items():
            for b, cb in y.items():
                elem_add(out, self.mul_basis(a, b), self.p, ca * cb)
        return out

    def validate(self) -> ValidationReport:
        rep = self.comodule.validate()
        rep.subject = f"comodule algebra {self.name}"
        p = self.p
        g = self.gamma
        basis = [(self.space.degree(m), m) for m in self.space.all_labels()]
        pairs = [(da + db, (a, b)) for da, a in basis for db, b in basis if da + db <= g.max_degree]
        pairs.sort(key=lambda t: t[0])

        def closed(ab):
            try:
                self.mul_basis(*ab)
            except ClosureError as exc:
                return str(exc)
            return None

        rep.add("multiplicatively closed", _first(pairs, closed))
        if not rep.checks[-1].passed:
            return rep
        rep.add("unit", _first(basis, lambda m: None if self.mul({self.unit: 1}, {m: 1}) == {m: 1}
                                and self.mul({m: 1}, {self.unit: 1}) == {m: 1} else f"unit law on {self.space.fmt(m)}"))

        def assoc(ab):
            a, b = ab
            for dc, c in basis:
                if self.space.degree(a) + self.space.degree(b) + dc > g.max_degree:
                    break
                if self.mul(self.mul({a: 1}, {b: 1}), {c: 1}) != self.mul({a: 1}, self.mul({b: 1}, {c: 1})):
                    return f"associativity on {self.space.fmt(a)},{self.space.fmt(b)},{self.space.fmt(c)}"
            return None

        rep.add("associativity", _first(pairs, assoc))

        def mult(ab):
            a, b = ab
            lhs: Dict = {}
            for x, c in self.mul({a: 1}, {b: 1}).items():
                elem_add(lhs, self.comodule.coaction(x), p, c)
            rhs: Dict = {}
            for (g1, x1), c1 in self.comodule.coaction(a).items():
                dx1 = self.space.degree(x1)
                for (g2, x2), c2 in self.comodule.coaction(b).items():
                    r = g.mul_basis(g1, g2)
                    if r is None:
                        continue
                    s = r[1] * koszul(dx1, g.degree(g2))
                    for y, c3 in self.mul_basis(x1, x2).items():
                        key = (r[0], y)
                        rhs[key] = (rhs.get(key, 0) + s * c1 * c2 * c3) % p
            return None if _clean(lhs, p) == _clean(rhs, p) else f"ψ not multiplicative on {self.space.fmt(a)}·{self.space.fmt(b)}"

        rep.add("coaction is an algebra map", _first(pairs, mult))
        return rep

    def subcoalgebra_witness(self) -> Optional[str]:
        """None if Δ(Φ) ⊆ Φ⊗Φ, else a description of an offending term."""
        g = self.gamma
        for lab in self.space.all_labels():
            by_right: Dict = {}
            for x, c in self.sub.embed_label(lab).items():
                for (a, b), c2 in g.coproduct(x).items():
                    d = by_right.setdefault(b, {})
                    d[a] = (d.get(a, 0) + c * c2) % g.p
            # the left tensor factor of every term must lie in Φ
            for b, part in sorted(by_right.items()):
                part = _clean(part, g.p)
                if part and not self.sub.contains(part):
                    terms = " + ".join(f"{c}·{g.fmt(a)}" for a, c in sorted(part.items()))
                    return (f"Δ({self.space.fmt(lab)}) has component ({terms})⊗{g.fmt(b)} "
                            f"with left factor outside {self.name}")
        return None

    def __repr__(self):
        return f"ComoduleAlgebra({self.name}, dims={self.space.dims()})"


def comodule_algebra_from_cotensor(gamma: HopfAlgebra, sigma: HopfAlgebra, quot: HopfQuotient,
                                   name: str = "Φ") -> ComoduleAlgebra:
    """Φ = Γ□_Σ k ⊂ Γ with Δ restricted as left Γ-coaction."""
    right = Comodule(sigma, gamma.space, quot.right_sigma_coaction, "right", gamma.name)
    k = Comodule.trivial(sigma, "left")
    cot = cotensor(right, k)
    parts = {}
    for u, sub in cot.parts.items():
        # Γ⊗k slice u has the same ordering as Γ slice u
        parts[u] = Subspace(gamma.space.dim(u), gamma.p, sub.rows, sub.pivots)
    sub = GradedSubspace(gamma.space, parts, gamma.p, name)
    comod = subcomodule(Comodule.regular(gamma), sub, name)
    alg = ComoduleAlgebra(comod, sub, gamma, name)
    rep = alg.validate()
    if not rep.ok:
        f = rep.first_failure()
        raise ClosureError(f"{f.name} fails for {name}: {f.witness}")
    return alg


class KernelBicomodule:
    """G = ker(q) with its right and left Σ-coactions."""

    def __init__(self, quot: HopfQuotient):
        self.quot = quot
        gamma = quot.gamma
        self.gamma = gamma
        parts = {}
        qmap = quot.graded_map()
        for u in gamma.space.degrees():
            parts[u] = kernel(qmap.block(u))
        self.sub = GradedSubspace(gamma.space, parts, gamma.p, "G")
        self.space = self.sub.space
        self.p = gamma.p

    def contains_label(self, m: Monomial) -> bool:
        return self.quot.in_kernel(m)

    def right_coaction(self, g: Monomial) -> Dict:
        out = self.quot.right_sigma_coaction(g)
        for (a, _s) in out:
            if not self.quot.in_kernel(a):
                raise ClosureError(f"right Σ-coaction of {self.gamma.fmt(g)} leaves G", witness=g)
        return out

    def left_coaction(self, g: Monomial) -> Dict:
        out = self.quot.left_sigma_coaction(g)
        for (_s, b) in out:
            if not self.quot.in_kernel(b):
                raise ClosureError(f"left Σ-coaction of {self.gamma.fmt(g)} leaves G", witness=g)
        return out

    def as_bicoaction(self) -> Bicoaction:
        return Bicoaction(self.space, self.left_coaction, self.right_coaction, "G")

    def report(self) -> ValidationReport:
        rep = ValidationReport("kernel bicomodule G")
        g = self.gamma
        basis = [(g.degree(m), m) for m in self.space.all_labels()]

        def eq_kernel(_):
            return None

        rep.add("G = ker q", _first(basis, lambda m: None if self.quot.in_kernel(m) else f"{g.fmt(m)} ∉ ker q"))

        def closed(fn):
            def check(m):
                try:
                    fn(m)
                except ClosureError as exc:
                    return str(exc)
                return None
            return check

        rep.add("closed under right Σ-coaction", _first(basis, closed(self.right_coaction)))
        rep.add("closed under left Σ-coaction", _first(basis, closed(self.left_coaction)))
        rep.add("two-sided ideal", _first(
            [(g.degree(m) + g.degree(x), (m, x)) for _, m in basis for x in g.basis()
             if g.degree(m) + g.degree(x) <= g.max_degree],
            lambda mx: None if all(self.quot.in_kernel(k) for k in
                                   list(g.mul({mx[0]: 1}, {mx[1]: 1})) + list(g.mul({mx[1]: 1}, {mx[0]: 1})))
            else f"{g.fmt(mx[0])}·{g.fmt(mx[1])} ∉ G"))
        return rep

    def left_gamma_witness(self) -> Optional[str]:
        """G is generally not a left Γ-subcomodule; return the first offending term."""
        g = self.gamma
        for m in self.space.all_labels():
            for (a, b) in sorted(g.coproduct(m)):
                if not self.quot.in_kernel(b):
                    return f"Δ({g.fmt(m)}) ∋ {g.fmt(a)}⊗{g.fmt(b)} with {g.fmt(b)} ∉ G"
        return None


def kernel_bicomodule(gamma: HopfAlgebra, sigma: HopfAlgebra, quot: HopfQuotient) -> KernelBicomodule:
    return KernelBicomodule(quot)


# ---------------------------------------------------------------- iterated coproducts

def iterated_coproduct_element(h: HopfAlgebra, m: Monomial, n: int) -> Dict[Tuple, int]:
    """Δⁿ(m) as {(m₁,…,m_{n+1}): c}, splitting the last factor each time."""
    cache = h.__dict__.setdefault("_iterated_cache", {})
    hit = cache.get((m, n))
    if hit is not None:
        return hit
    acc: Dict[Tuple, int] = {(m,): 1}
    for _ in range(n):
        nxt: Dict[Tuple, int] = {}
        for word, c in acc.items():
            for (a, b), c2 in h.coproduct(word[-1]).items():
                key = word[:-1] + (a, b)
                nxt[key] = (nxt.get(key, 0) + c * c2) % h.p
        acc = {k: v for k, v in nxt.items() if v}
    cache[(m, n)] = acc
    return acc


def iterated_coaction_element(m: Comodule, label, n: int) -> Dict[Tuple, int]:
    """ψⁿ(x) for a left comodule as {(g₁,…,g_n, x′): c}."""
    cache = m.__dict__.setdefault("_iterated_cache", {})
    hit = cache.get((label, n))
    if hit is not None:
        return hit
    p = m.p
    acc: Dict[Tuple, int] = {(label,): 1}
    for _ in range(n):
        nxt: Dict[Tuple, int] = {}
        for word, c in acc.items():
            for (g, x), c2 in m.coaction(word[-1]).items():
                key = word[:-1] + (g, x)
                nxt[key] = (nxt.get(key, 0) + c * c2) % p
        acc = {k: v for k, v in nxt.items() if v}
    cache[(label, n)] = acc
    return acc


def iterated_coproduct(obj, n: int) -> GradedMap:
    if isinstance(obj, HopfAlgebra):
        target = tensor([obj.space] * (n + 1)) if n else obj.space
        if n == 0:
            return GradedMap.identity(obj.space, obj.p)
        return GradedMap.from_function(obj.space, target, obj.p,
                                       lambda m: iterated_coproduct_element(obj, m, n))
    if n == 0:
        return GradedMap.identity(obj.space, obj.p)
    target = tensor([obj.over.space] * n + [obj.space])
    return GradedMap.from_function(obj.space, target, obj.p,
                                   lambda x: iterated_coaction_element(obj, x, n))


# ---------------------------------------------------------------- freeness

@dataclass
class FreenessReport:
    free: bool
    window: int
    trivial_summands: Dict[int, int]
    positive_cotor: Dict[Tuple[int, int], int]
    witness: Optional[str] = None


def freeness_window_check(m: Comodule, window: int, s_max: int = 3) -> FreenessReport:
    """Trivial ⊕ free splitting test over a finite Σ via positive-degree Cotor."""
    from .cobar import cotor  # local import: cobar depends on this module

    k = Comodule.trivial(m.over, "right")
    table = cotor(m.over, k, m, s_max=s_max, max_degree=window)
    positive = {(s, u): d for (s, u), d in table.dims.items() if s > 0 and d}
    trivial = {u: d for (s, u), d in table.dims.items() if s == 0 and d}
    witness = None
    if positive:
        (s, u) = min(positive)
        witness = f"Cotor^{s} nonzero in internal degree {u}: {table.format_representative(s, u, 0)}"
    return FreenessReport(not positive, window, trivial, positive, witness)
