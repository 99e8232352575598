"""Built-in extensions Γ → Σ, truncated to a window of internal degrees.

Truncating at generator cutoff m leaves every structure map unchanged below
the degree of the first omitted generator, so results are certified only
there (and never above the window D).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Tuple

from .hopf import ClosureError, Generator, HopfAlgebra, Presentation, QuotientError
from .specseq import ExtensionDatum


class CatalogError(ValueError):
    pass


@dataclass(frozen=True)
class ExampleCatalogEntry:
    name: str
    summary: str
    defaults: Dict[str, int]
    presentation: Callable[..., Presentation]
    killed: Callable[..., List[str]]
    first_omitted: Callable[..., Optional[int]]
    localize_below: Optional[Callable[..., int]] = None

    def params(self, **overrides) -> Dict[str, int]:
        unknown = set(overrides) - set(self.defaults)
        if unknown:
            raise CatalogError(f"{self.name}: unknown parameters {sorted(unknown)}")
        out = dict(self.defaults)
        out.update({k: v for k, v in overrides.items() if v is not None})
        return out

    def certified_below(self, **params) -> int:
        """Internal degrees strictly below this value are exact."""
        prm = self.params(**params)
        cut = self.first_omitted(**prm)
        top = prm["D"] + 1
        return top if cut is None else min(cut, top)


# ---------------------------------------------------------------- presentations

def exterior_presentation(p: int, m: int, D: int) -> Presentation:
    gens = tuple(Generator(f"tau{i}", 2 * p ** i - 1, 2) for i in range(m + 1))
    return Presentation(p, D, gens, {}, {}, "E")


def dual_steenrod_presentation(p: int, m: int, D: int) -> Presentation:
    """ξ₁..ξ_m, τ₀..τ_m with the Milnor coproducts."""
    gens: List[Generator] = []
    cop: Dict[str, Tuple] = {}
    for n in range(1, m + 1):
        gens.append(Generator(f"xi{n}", 2 * (p ** n - 1), None))
    for n in range(m + 1):
        gens.append(Generator(f"tau{n}", 2 * p ** n - 1, 2))
    for n in range(1, m + 1):
        terms = [(1, f"xi{n}", "1"), (1, "1", f"xi{n}")]
        terms += [(1, f"xi{n - i}^{p ** i}", f"xi{i}") for i in range(1, n)]
        cop[f"xi{n}"] = tuple(terms)
    for n in range(m + 1):
        terms = [(1, f"tau{n}", "1"), (1, "1", f"tau{n}")]
        terms += [(1, f"xi{n - i}^{p ** i}", f"tau{i}") for i in range(n)]
        cop[f"tau{n}"] = tuple(terms)
    return Presentation(p, D, tuple(gens), cop, {}, "A")


def polynomial_part_presentation(p: int, m: int, D: int) -> Presentation:
    """P = F_p[ξ₁..ξ_m] with the Milnor coproduct."""
    gens = tuple(Generator(f"xi{n}", 2 * (p ** n - 1), None) for n in range(1, m + 1))
    cop = {}
    for n in range(1, m + 1):
        terms = [(1, f"xi{n}", "1"), (1, "1", f"xi{n}")]
        terms += [(1, f"xi{n - i}^{p ** i}", f"xi{i}") for i in range(1, n)]
        cop[f"xi{n}"] = tuple(terms)
    return Presentation(p, D, gens, cop, {}, "P")


def truncated_polynomial_presentation(p: int, D: int, degree: int) -> Presentation:
    return Presentation(p, D, (Generator("xi", degree, p),), {}, {}, "T")


def exterior_one_presentation(p: int, D: int, degree: int) -> Presentation:
    return Presentation(p, D, (Generator("x", degree, 2),), {}, {}, "E1")


def _present(pres: Presentation) -> List[str]:
    return [g.name for g in pres.generators if g.degree <= pres.max_degree]


CATALOG: Dict[str, ExampleCatalogEntry] = {
    "exterior-split": ExampleCatalogEntry(
        "exterior-split",
        "E[τ₀,…,τ_m] with primitive generators over Σ = E[τ₀]; Φ = E[τ₁,…,τ_m] is a sub-Hopf algebra",
        {"p": 3, "m": 2, "D": 12},
        lambda p, m, D: exterior_presentation(p, m, D),
        lambda p, m, D: [f"tau{i}" for i in range(1, m + 1) if 2 * p ** i - 1 <= D],
        lambda p, m, D: 2 * p ** (m + 1) - 1,
    ),
    "dualA-odd": ExampleCatalogEntry(
        "dualA-odd",
        "truncated dual Steenrod algebra at odd p over Σ = E[τ₀]; Φ = C = F_p[ξ]⊗E[τ₁,…]",
        {"p": 3, "m": 1, "D": 14},
        lambda p, m, D: dual_steenrod_presentation(p, m, D),
        lambda p, m, D: [n for n in [f"xi{i}" for i in range(1, m + 1)] + [f"tau{i}" for i in range(1, m + 1)]
                         if n in _present(dual_steenrod_presentation(p, m, D))],
        lambda p, m, D: 2 * (p ** (m + 1) - 1),
        # the first a₀-tower of height ≥ 2 besides the unit tower sits on [ξ₁^p]
        lambda p, m, D: 2 * p * (p - 1),
    ),
    "P-b10": ExampleCatalogEntry(
        "P-b10",
        "truncated P = F₃[ξ₁,ξ₂,…] over Σ = F₃[ξ₁]/ξ₁³; Φ = B is not a sub-coalgebra",
        {"p": 3, "m": 2, "D": 16},
        lambda p, m, D: polynomial_part_presentation(p, m, D),
        lambda p, m, D: [f"xi1^{p}"] + [n for n in (f"xi{i}" for i in range(2, m + 1))
                                         if n in _present(polynomial_part_presentation(p, m, D))],
        lambda p, m, D: 2 * (p ** (m + 1) - 1),
    ),
    "trunc-poly": ExampleCatalogEntry(
        "trunc-poly",
        "F_p[ξ]/ξ^p on one generator, over Σ = k",
        {"p": 3, "D": 28, "degree": 4},
        lambda p, D, degree: truncated_polynomial_presentation(p, D, degree),
        lambda p, D, degree: ["xi"],
        lambda p, D, degree: None,
    ),
    "exterior-one": ExampleCatalogEntry(
        "exterior-one",
        "E[x] on one generator, over Σ = k",
        {"p": 3, "D": 24, "degree": 3},
        lambda p, D, degree: exterior_one_presentation(p, D, degree),
        lambda p, D, degree: ["x"],
        lambda p, D, degree: None,
    ),
}


def names() -> List[str]:
    return sorted(CATALOG)


def entry(name: str) -> ExampleCatalogEntry:
    try:
        return CATALOG[name]
    except KeyError:
        raise CatalogError(f"unknown example {name!r}; known: {', '.join(names())}") from None


def presentation(name: str, **params) -> Presentation:
    e = entry(name)
    prm = e.params(**params)
    pres = e.presentation(**prm)
    low = min(g.degree for g in pres.generators)
    if prm["D"] < low:
        raise CatalogError(f"window too small: D={prm['D']} is below the first generator degree {low}")
    return pres


def example(name: str, check: bool = True, **params) -> ExtensionDatum:
    """Build (and by default validate) the catalog datum ``name``."""
    e = entry(name)
    prm = e.params(**params)
    pres = presentation(name, **prm)
    gamma = HopfAlgebra(pres, pres.name)
    try:
        datum = ExtensionDatum(gamma, e.killed(**prm), name=name, certified_below=e.certified_below(**prm))
    except (ClosureError, QuotientError) as exc:
        raise CatalogError(f"{name}: {exc}") from None
    if e.localize_below is not None:
        datum.localize_below = min(datum.certified_below, e.localize_below(**prm))
    datum.params = prm
    if check:
        rep = datum.validate()
        if not rep.ok:
            f = rep.first_failure()
            raise CatalogError(f"{name}: {f.name} fails at degree {f.degree}: {f.witness}")
    return datum
