"""Internally graded vector spaces with labelled bases and graded maps.

Labels are arbitrary hashable objects; tensor products use tuples of
factor labels.  Elements are dicts ``{label: coefficient}``.
"""
from __future__ import annotations

from typing import Callable, Dict, Hashable, Iterable, Iterator, List, Mapping, Sequence, Tuple

from .fplin import LinearAlgebraError, SparseMatrix, Subspace, vec_axpy

Label = Hashable
Element = Dict[Label, int]


class GradedError(ValueError):
    pass


def elem_add(target: Element, other: Mapping[Label, int], p: int, scale: int = 1) -> None:
    vec_axpy(target, scale, other, p)  # works on any hashable keys


def elem_clean(e: Mapping[Label, int], p: int) -> Element:
    return {k: c % p for k, c in e.items() if c % p}


class GradedSpace:
    """Finite slices indexed by internal degree ``0..max_degree``."""

    def __init__(self, slices: Mapping[int, Sequence[Label]], max_degree: int,
                 name: str = "", formatter: Callable[[Label], str] | None = None):
        self.max_degree = max_degree
        self.name = name
        self._slices: Dict[int, Tuple[Label, ...]] = {}
        self._index: Dict[int, Dict[Label, int]] = {}
        self._degree: Dict[Label, int] = {}
        for u in sorted(slices):
            labels = tuple(slices[u])
            if not labels:
                continue
            if u < 0 or u > max_degree:
                raise GradedError(f"slice {u} outside 0..{max_degree}")
            idx = {lab: i for i, lab in enumerate(labels)}
            if len(idx) != len(labels):
                raise GradedError(f"duplicate labels in slice {u}")
            self._slices[u] = labels
            self._index[u] = idx
            for lab in labels:
                self._degree[lab] = u
        self._formatter = formatter

    @classmethod
    def unit(cls, max_degree: int) -> "GradedSpace":
        return cls({0: [()]}, max_degree, name="k", formatter=lambda _l: "1")

    def degrees(self) -> List[int]:
        return list(self._slices)

    def labels(self, u: int) -> Tuple[Label, ...]:
        return self._slices.get(u, ())

    def dim(self, u: int) -> int:
        return len(self._slices.get(u, ()))

    def dims(self) -> Dict[int, int]:
        return {u: len(v) for u, v in self._slices.items()}

    @property
    def total_dim(self) -> int:
        return sum(len(v) for v in self._slices.values())

    def index(self, label: Label) -> int:
        return self._index[self._degree[label]][label]

    def degree(self, label: Label) -> int:
        return self._degree[label]

    def __contains__(self, label) -> bool:
        return label in self._degree

    def all_labels(self) -> Iterator[Label]:
        for u in self._slices:
            yield from self._slices[u]

    def fmt(self, label: Label) -> str:
        if self._formatter is not None:
            return self._formatter(label)
        return str(label)

    def to_vector(self, u: int, elem: Mapping[Label, int]) -> Dict[int, int]:
        idx = self._index.get(u, {})
        out = {}
        for lab, c in elem.items():
            if c:
                try:
                    out[idx[lab]] = c
                except KeyError:
                    raise GradedError(f"label {lab!r} not in slice {u} of {self.name or 'space'}") from None
        return out

    def from_vector(self, u: int, vec: Mapping[int, int]) -> Element:
        labs = self._slices.get(u, ())
        return {labs[i]: c for i, c in vec.items() if c}

    def __repr__(self):
        return f"GradedSpace({self.name or '?'}, dims={self.dims()}, D={self.max_degree})"


def _compositions(spaces: Sequence[GradedSpace], u: int) -> Iterator[Tuple[int, ...]]:
    if not spaces:
        if u == 0:
            yield ()
        return
    first, rest = spaces[0], spaces[1:]
    for u1 in first.degrees():
        if u1 > u:
            break
        for tail in _compositions(rest, u - u1):
            yield (u1,) + tail


def _words(spaces: Sequence[GradedSpace], comp: Tuple[int, ...]) -> Iterator[Tuple[Label, ...]]:
    if not spaces:
        yield ()
        return
    for lab in spaces[0].labels(comp[0]):
        for tail in _words(spaces[1:], comp[1:]):
            yield (lab,) + tail


def tensor(spaces: Sequence[GradedSpace], name: str = "") -> GradedSpace:
    """Tensor product; slice u is ordered by degree composition, then labels."""
    if not spaces:
        raise GradedError("empty tensor product")
    D = min(s.max_degree for s in spaces)
    slices = {}
    for u in range(D + 1):
        labels = []
        for comp in _compositions(spaces, u):
            labels.extend(_words(spaces, comp))
        if labels:
            slices[u] = labels
    fmts = [s.fmt for s in spaces]

    def formatter(word):
        return "⊗".join(f(l) for f, l in zip(fmts, word))

    return GradedSpace(slices, D, name=name or "⊗".join(s.name for s in spaces), formatter=formatter)


class GradedMap:
    """Per-degree blocks: block u maps slice u of source to slice u+shift of target."""

    def __init__(self, source: GradedSpace, target: GradedSpace, p: int,
                 blocks: Mapping[int, SparseMatrix] | None = None, shift: int = 0):
        self.source = source
        self.target = target
        self.p = p
        self.shift = shift
        self.blocks: Dict[int, SparseMatrix] = {}
        for u, m in (blocks or {}).items():
            if m.shape != (target.dim(u + shift), source.dim(u)):
                raise GradedError(f"block {u} has shape {m.shape}, expected "
                                  f"{(target.dim(u + shift), source.dim(u))}")
            if not m.is_zero():
                self.blocks[u] = m

    @classmethod
    def from_function(cls, source: GradedSpace, target: GradedSpace, p: int,
                      fn: Callable[[Label], Mapping[Label, int]], shift: int = 0) -> "GradedMap":
        blocks = {}
        for u in source.degrees():
            v = u + shift
            if v > target.max_degree or v < 0:
                continue
            cols = []
            for lab in source.labels(u):
                img = {k: c for k, c in fn(lab).items() if c % p}
                cols.append(target.to_vector(v, img))
            blocks[u] = SparseMatrix.from_columns(cols, target.dim(v), p)
        return cls(source, target, p, blocks, shift)

    @classmethod
    def identity(cls, space: GradedSpace, p: int) -> "GradedMap":
        return cls(space, space, p, {u: SparseMatrix.identity(space.dim(u), p) for u in space.degrees()})

    def block(self, u: int) -> SparseMatrix:
        m = self.blocks.get(u)
        if m is None:
            return SparseMatrix.zero(self.target.dim(u + self.shift), self.source.dim(u), self.p)
        return m

    def apply(self, elem: Mapping[Label, int]) -> Element:
        by_deg: Dict[int, Dict[Label, int]] = {}
        for lab, c in elem.items():
            by_deg.setdefault(self.source.degree(lab), {})[lab] = c
        out: Element = {}
        for u, part in by_deg.items():
            vec = self.block(u).apply(self.source.to_vector(u, part))
            out.update(self.target.from_vector(u + self.shift, vec))
        return out

    def is_zero(self) -> bool:
        return not self.blocks

    def __eq__(self, other):
        if not isinstance(other, GradedMap) or self.shift != other.shift:
            return False
        keys = set(self.blocks) | set(other.blocks)
        return all(self.block(u) == other.block(u) for u in keys)

    def __sub__(self, other: "GradedMap") -> "GradedMap":
        keys = set(self.blocks) | set(other.blocks)
        return GradedMap(self.source, self.target, self.p,
                         {u: self.block(u) - other.block(u) for u in keys}, self.shift)

    def __add__(self, other: "GradedMap") -> "GradedMap":
        keys = set(self.blocks) | set(other.blocks)
        return GradedMap(self.source, self.target, self.p,
                         {u: self.block(u) + other.block(u) for u in keys}, self.shift)

    def scale(self, a: int) -> "GradedMap":
        return GradedMap(self.source, self.target, self.p,
                         {u: m.scale(a) for u, m in self.blocks.items()}, self.shift)

    def __repr__(self):
        return f"GradedMap({self.source.name} -> {self.target.name}, shift={self.shift})"


def compose(f: GradedMap, g: GradedMap) -> GradedMap:
    """f after g."""
    if g.target is not f.source and g.target.dims() != f.source.dims():
        raise GradedError("dimension mismatch in compose")
    blocks = {}
    for u in g.source.degrees():
        blocks[u] = f.block(u + g.shift) @ g.block(u)
    return GradedMap(g.source, f.target, f.p, blocks, f.shift + g.shift)


def tensor_map(maps: Sequence[GradedMap], global_sign_exponent: int | None = None,
               source: GradedSpace | None = None, target: GradedSpace | None = None) -> GradedMap:
    """Tensor product of degree-preserving maps, optionally times (-1)^t."""
    if any(m.shift for m in maps):
        raise GradedError("tensor_map supports degree-preserving factors only")
    p = maps[0].p
    src = source or tensor([m.source for m in maps])
    tgt = target or tensor([m.target for m in maps])
    sign = -1 if (global_sign_exponent or 0) % 2 else 1

    def fn(word):
        acc: Dict[Tuple, int] = {(): sign}
        for m, lab in zip(maps, word):
            img = m.apply({lab: 1})
            nxt: Dict[Tuple, int] = {}
            for w, a in acc.items():
                for l2, b in img.items():
                    key = w + (l2,)
                    nxt[key] = (nxt.get(key, 0) + a * b) % p
            acc = {k: v for k, v in nxt.items() if v}
        return acc

    return GradedMap.from_function(src, tgt, p, fn)


class GradedSubspace:
    """Per-degree subspaces of a graded space; basis labelled by pivot labels."""

    def __init__(self, ambient: GradedSpace, parts: Mapping[int, Subspace], p: int, name: str = ""):
        self.ambient = ambient
        self.p = p
        self.parts: Dict[int, Subspace] = {}
        slices = {}
        for u, sub in parts.items():
            if sub.dim == 0:
                continue
            self.parts[u] = sub
            labs = ambient.labels(u)
            slices[u] = [labs[piv] for piv in sub.pivots]
        self._embed_cache: Dict[Label, Element] = {}
        self.space = GradedSpace(slices, ambient.max_degree, name=name or f"sub({ambient.name})",
                                 formatter=self._fmt)

    def _fmt(self, label: Label) -> str:
        elem = self.embed_label(label)
        if len(elem) == 1 and next(iter(elem.values())) == 1:
            return self.ambient.fmt(label)
        # pivot term first, then the rest in basis order
        terms = sorted(elem.items(), key=lambda kv: (kv[0] != label, self.ambient.index(kv[0])))
        body = " + ".join(self.ambient.fmt(l) if c == 1 else f"{c}*{self.ambient.fmt(l)}" for l, c in terms)
        return f"({body})"

    @classmethod
    def span(cls, ambient: GradedSpace, elements: Iterable[Mapping[Label, int]], p: int, name: str = ""):
        by_deg: Dict[int, list] = {}
        for e in elements:
            for lab, c in e.items():
                if c % p:
                    by_deg.setdefault(ambient.degree(lab), []).append(e)
                    break
        parts = {}
        for u, elems in by_deg.items():
            parts[u] = Subspace.span([ambient.to_vector(u, e) for e in elems], ambient.dim(u), p)
        return cls(ambient, parts, p, name)

    def part(self, u: int) -> Subspace:
        return self.parts.get(u) or Subspace.zero(self.ambient.dim(u), self.p)

    def dim(self, u: int) -> int:
        return self.space.dim(u)

    def embed_label(self, label: Label) -> Element:
        e = self._embed_cache.get(label)
        if e is None:
            u = self.space.degree(label)
            sub = self.parts[u]
            row = sub.rows[self.space.index(label)]
            e = self.ambient.from_vector(u, dict(row))
            self._embed_cache[label] = e
        return e

    def embed(self, elem: Mapping[Label, int]) -> Element:
        out: Element = {}
        for lab, c in elem.items():
            elem_add(out, self.embed_label(lab), self.p, c)
        return out

    def coordinates(self, elem: Mapping[Label, int], check: bool = True) -> Element:
        """Express an ambient element (homogeneous pieces allowed) in the sub basis."""
        by_deg: Dict[int, Dict[Label, int]] = {}
        for lab, c in elem.items():
            if c % self.p:
                by_deg.setdefault(self.ambient.degree(lab), {})[lab] = c
        out: Element = {}
        for u, part in by_deg.items():
            sub = self.part(u)
            vec = self.ambient.to_vector(u, part)
            if check and sub.residual(vec):
                raise LinearAlgebraError(f"not a subspace: element leaves the subspace in degree {u}")
            coords = sub.coordinates(vec, check=False)
            out.update(self.space.from_vector(u, coords))
        return out

    def contains(self, elem: Mapping[Label, int]) -> bool:
        try:
            self.coordinates(elem)
            return True
        except LinearAlgebraError:
            return False

    def inclusion(self) -> GradedMap:
        return GradedMap.from_function(self.space, self.ambient, self.p, self.embed_label)


class RestrictionError(ValueError):
    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


def restrict_corestrict(f: GradedMap, source_sub: GradedSubspace, target_sub: GradedSubspace) -> GradedMap:
    """Induced map between sub-bases; raises with the first escaping basis vector."""
    p = f.p

    def fn(lab):
        img = f.apply(source_sub.embed_label(lab))
        try:
            return target_sub.coordinates(img)
        except LinearAlgebraError:
            raise RestrictionError(f"does not restrict: image of {source_sub.space.fmt(lab)} "
                                   f"leaves the target subspace", witness=lab) from None

    return GradedMap.from_function(source_sub.space, target_sub.space, p, fn, f.shift)
