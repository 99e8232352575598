"""Shear isomorphisms and their iterated closed forms.

Iterated maps are built from the Sweedler closed forms.  The
``*_by_composition`` builders compose single shears and serve as an
independent check.  Closed forms that reorder Sweedler factors carry the
Koszul sign of that reordering.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

from .fplin import SparseMatrix, rank
from .graded import GradedMap, GradedSpace, GradedSubspace, RestrictionError, compose, tensor
from .hopf import (Bicoaction, Comodule, ComoduleAlgebra, HopfAlgebra, HopfQuotient, KernelBicomodule,
                   iterated_coaction_element, iterated_coproduct_element, multi_cotensor_parts)


class ShearError(ValueError):
    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


@dataclass
class ShearMap:
    direction: str  # "S", "S_inv", "Sc", "Sc_inv"
    n: int
    source: GradedSpace
    target: GradedSpace
    matrix: GradedMap

    def apply(self, elem):
        return self.matrix.apply(elem)

    def is_bijective(self) -> bool:
        for u in set(self.source.degrees()) | set(self.target.degrees()):
            if self.source.dim(u) != self.target.dim(u) or rank(self.matrix.block(u)) != self.source.dim(u):
                return False
        return True


# ---------------------------------------------------------------- helpers

def _perm_sign(degrees: Sequence[int], order: Sequence[int]) -> int:
    """Koszul sign for reordering factors of the given degrees into ``order``."""
    odd = [d & 1 for d in degrees]
    n = 0
    for a in range(len(order)):
        if not odd[order[a]]:
            continue
        for b in range(a + 1, len(order)):
            if odd[order[b]] and order[b] < order[a]:
                n += 1
    return -1 if n % 2 else 1


def _product(h: HopfAlgebra, factors: Sequence) -> Optional[Tuple[tuple, int]]:
    acc = h.unit
    sign = 1
    for f in factors:
        r = h.mul_basis(acc, f)
        if r is None:
            return None
        acc, s = r
        sign *= s
    return acc, sign


def _mul_elem_list(h: HopfAlgebra, elems: Sequence[Dict]) -> Dict:
    acc = {h.unit: 1}
    for e in elems:
        acc = h.mul(acc, e)
    return acc


def _check_left(M: Comodule):
    if M.side != "left":
        raise ValueError("shear expects a left comodule")


def _check_right(M: Comodule):
    if M.side != "right":
        raise ValueError("right shear expects a right comodule")


# ---------------------------------------------------------------- single shears

def shear(gamma: HopfAlgebra, M: Comodule) -> ShearMap:
    """S(a⊗m) = Σ a m′ ⊗ m″ on Γ⊗M."""
    return iterated_shear(gamma, M, 1)


def shear_inv(gamma: HopfAlgebra, M: Comodule) -> ShearMap:
    """S⁻¹(a⊗m) = Σ a c(m′) ⊗ m″."""
    return iterated_shear_inv(gamma, M, 1)


def shear_c(gamma: HopfAlgebra, M: Comodule) -> ShearMap:
    """S_c(m⊗a) = Σ m′ ⊗ m″ a on M⊗Γ, M a right comodule."""
    return iterated_shear_c(gamma, M, 1)


def shear_c_inv(gamma: HopfAlgebra, M: Comodule) -> ShearMap:
    """S_c⁻¹(m⊗a) = Σ m′ ⊗ c(m″) a."""
    return iterated_shear_c_inv(gamma, M, 1)


# ---------------------------------------------------------------- closed forms

def _space_left(gamma, M, n):
    return tensor([gamma.space] * n + [M.space], name=f"Γ^{n}⊗{M.name}")


def _space_right(gamma, M, n):
    return tensor([M.space] + [gamma.space] * n, name=f"{M.name}⊗Γ^{n}")


def _place(gamma: HopfAlgebra, states: Dict, pieces: Dict, targets: Sequence[int], degree_of, p: int) -> Dict:
    """Right-multiply Sweedler part j of a factor into slot targets[j] of every state.

    States are tuples of slot entries; entry 0 may be a comodule label (never
    multiplied).  Part j passes every entry already sitting in a later slot,
    which costs the Koszul sign.
    """
    out: Dict = {}
    deg = gamma.degree
    mul = gamma.mul_basis
    plist = [(parts, c2, [deg(x) & 1 for x in parts]) for parts, c2 in pieces.items()]
    for state, c in states.items():
        degs = degree_of(state)
        # parity of the total degree sitting strictly after each slot
        after = [0] * len(state)
        acc = 0
        for k in range(len(state) - 1, -1, -1):
            after[k] = acc
            acc ^= degs[k] & 1
        for parts, c2, odd in plist:
            slots = list(state)
            sign = 1
            ok = True
            for part, slot, o in zip(parts, targets, odd):
                if o and after[slot]:
                    sign = -sign
                r = mul(slots[slot], part)
                if r is None:
                    ok = False
                    break
                slots[slot], s2 = r
                sign *= s2
            if ok:
                key = tuple(slots)
                out[key] = (out.get(key, 0) + sign * c * c2) % p
    return {k: v for k, v in out.items() if v}


def iterated_shear_element(gamma: HopfAlgebra, M: Comodule, word: tuple) -> Dict:
    """Sⁿ(x₁|…|x_n|m): slot j is x_j₍ⱼ₎ x_{j+1}₍ⱼ₎ … x_n₍ⱼ₎ m₍ⱼ₎, last slot m₍ₙ₊₁₎."""
    p = gamma.p
    n = len(word) - 1
    xs, m = word[:-1], word[-1]
    deg = lambda state: [gamma.degree(y) for y in state]
    states: Dict = {tuple([gamma.unit] * n): 1}
    for i, x in enumerate(xs):
        states = _place(gamma, states, iterated_coproduct_element(gamma, x, i), range(i + 1), deg, p)
    by_last: Dict = {}
    for parts, c in iterated_coaction_element(M, m, n).items():
        by_last.setdefault(parts[n], {})[parts[:n]] = c
    out: Dict = {}
    for last, pieces in by_last.items():
        # m₍ⱼ₎ goes last in slot j, passing the x parts already in later slots
        for k, c in _place(gamma, states, pieces, range(n), deg, p).items():
            key = k + (last,)
            out[key] = (out.get(key, 0) + c) % p
    return {k: v for k, v in out.items() if v}


def iterated_shear(gamma: HopfAlgebra, M: Comodule, n: int) -> ShearMap:
    _check_left(M)
    if n < 1:
        raise ValueError("n must be at least 1")
    sp = _space_left(gamma, M, n)
    mat = GradedMap.from_function(sp, sp, gamma.p, lambda w: iterated_shear_element(gamma, M, w))
    return ShearMap("S", n, sp, sp, mat)


def iterated_shear_inv_element(gamma: HopfAlgebra, M: Comodule, word: tuple) -> Dict:
    """S⁻ⁿ(x₁|…|x_n|m) = Σ x₁c(x₂′)|x₂″c(x₃′)|…|x_n″c(m′)|m″ (no reordering)."""
    p = gamma.p
    n = len(word) - 1
    acc: Dict = {(): 1}
    carry = {word[0]: 1}  # left factor of the current slot, as an element
    # walk slots: slot j gets carry_j * c(next′), carry_{j+1} = next″
    states = [((), {word[0]: 1}, 1)]
    for j in range(1, n + 1):
        nxt = []
        if j < n:
            pieces = gamma.coproduct(word[j])
            for done, left, c in states:
                for (a, b), c2 in pieces.items():
                    slot = gamma.mul(left, gamma.antipode(a))
                    for lab, c3 in slot.items():
                        nxt.append((done + (lab,), {b: 1}, c * c2 * c3 % p))
        else:
            pieces = M.coaction(word[n])
            for done, left, c in states:
                for (a, b), c2 in pieces.items():
                    slot = gamma.mul(left, gamma.antipode(a))
                    for lab, c3 in slot.items():
                        nxt.append((done + (lab,), b, c * c2 * c3 % p))
        states = nxt
    out: Dict = {}
    for done, last, c in states:
        key = done + (last,)
        out[key] = (out.get(key, 0) + c) % p
    return {k: v for k, v in out.items() if v}


def iterated_shear_inv(gamma: HopfAlgebra, M: Comodule, n: int) -> ShearMap:
    _check_left(M)
    if n < 1:
        raise ValueError("n must be at least 1")
    sp = _space_left(gamma, M, n)
    mat = GradedMap.from_function(sp, sp, gamma.p, lambda w: iterated_shear_inv_element(gamma, M, w))
    return ShearMap("S_inv", n, sp, sp, mat)


def _right_iterated_coaction(M: Comodule, m, n: int) -> Dict:
    """ψⁿ for a right comodule: {(m₍₁₎, g₁, …, g_n): c}, splitting the M factor each time."""
    p = M.p
    acc: Dict = {(m,): 1}
    for _ in range(n):
        nxt: Dict = {}
        for word, c in acc.items():
            for (m2, g), c2 in M.coaction(word[0]).items():
                key = (m2, g) + word[1:]
                nxt[key] = (nxt.get(key, 0) + c * c2) % p
        acc = {k: v for k, v in nxt.items() if v}
    return acc


def iterated_shear_c_element(gamma: HopfAlgebra, M: Comodule, word: tuple) -> Dict:
    """S_cⁿ(m|x_n|…|x₁): slot k (k = 1..n) is m₍ₖ₊₁₎ x_n₍ₖ₎ x_{n−1}₍ₖ₋₁₎ … x_{n−k+1}₍₁₎."""
    p = gamma.p
    n = len(word) - 1
    xs = word[1:]  # xs[0] = x_n, ..., xs[n-1] = x_1
    out: Dict = {}
    for mparts, cm in _right_iterated_coaction(M, word[0], n).items():
        # slot 0 holds m₍₁₎, slot k holds m₍ₖ₊₁₎ to start
        states = {(mparts[0],) + tuple(mparts[1:]): cm}
        d0 = M.degree(mparts[0])

        def deg(state, d0=d0):
            return [d0] + [gamma.degree(y) for y in state[1:]]

        for i, x in enumerate(xs):
            # x_{n-i} splits into n-i parts landing in slots i+1..n
            states = _place(gamma, states, iterated_coproduct_element(gamma, x, n - i - 1),
                            range(i + 1, n + 1), deg, p)
        for k, c in states.items():
            out[k] = (out.get(k, 0) + c) % p
    return {k: v for k, v in out.items() if v}


def iterated_shear_c(gamma: HopfAlgebra, M: Comodule, n: int) -> ShearMap:
    _check_right(M)
    if n < 1:
        raise ValueError("n must be at least 1")
    sp = _space_right(gamma, M, n)
    mat = GradedMap.from_function(sp, sp, gamma.p, lambda w: iterated_shear_c_element(gamma, M, w))
    return ShearMap("Sc", n, sp, sp, mat)


def iterated_shear_c_inv_element(gamma: HopfAlgebra, M: Comodule, word: tuple) -> Dict:
    """S_c⁻ⁿ(m|x_n|…|x₁) = Σ m′|c(m″)x_n′|c(x_n″)x_{n−1}′|…|c(x₂″)x₁."""
    p = gamma.p
    n = len(word) - 1
    states = []
    for (m1, m2), c in M.coaction(word[0]).items():
        states.append(((m1,), gamma.antipode(m2), c))
    for k in range(1, n + 1):
        x = word[k]
        nxt = []
        if k < n:
            for done, left, c in states:
                for (a, b), c2 in gamma.coproduct(x).items():
                    for lab, c3 in gamma.mul(left, {a: 1}).items():
                        nxt.append((done + (lab,), gamma.antipode(b), c * c2 * c3 % p))
        else:
            for done, left, c in states:
                for lab, c3 in gamma.mul(left, {x: 1}).items():
                    nxt.append((done + (lab,), None, c * c3 % p))
        states = nxt
    out: Dict = {}
    for done, _, c in states:
        out[done] = (out.get(done, 0) + c) % p
    return {k: v for k, v in out.items() if v}


def iterated_shear_c_inv(gamma: HopfAlgebra, M: Comodule, n: int) -> ShearMap:
    _check_right(M)
    if n < 1:
        raise ValueError("n must be at least 1")
    sp = _space_right(gamma, M, n)
    mat = GradedMap.from_function(sp, sp, gamma.p, lambda w: iterated_shear_c_inv_element(gamma, M, w))
    return ShearMap("Sc_inv", n, sp, sp, mat)


# ---------------------------------------------------------------- composition oracles

def _first_slot_comodule(gamma: HopfAlgebra, space: GradedSpace) -> Comodule:
    return Comodule(gamma, space, lambda w: {(a, (b,) + w[1:]): c for (a, b), c in gamma.coproduct(w[0]).items()},
                    "left", space.name)


def _last_slot_right_comodule(gamma: HopfAlgebra, space: GradedSpace) -> Comodule:
    return Comodule(gamma, space, lambda w: {(w[:-1] + (a,), b): c for (a, b), c in gamma.coproduct(w[-1]).items()},
                    "right", space.name)


def shear_by_composition(gamma: HopfAlgebra, M: Comodule, n: int, inverse: bool = False) -> GradedMap:
    """Sⁿ = S ∘ (id⊗S^{n−1}) and S⁻ⁿ = S⁻¹ ∘ (id⊗S^{−(n−1)}), built from single shears only.

    In Sⁿ the outer S uses the coaction of Γ^{⊗n−1}⊗M on its first factor;
    in S⁻ⁿ the outer S⁻¹ uses the diagonal coaction of Γ^{⊗n−1}⊗M.
    """
    from .hopf import diagonal_tensor

    p = gamma.p
    if n == 1:
        return (shear_inv if inverse else shear)(gamma, M).matrix
    inner = shear_by_composition(gamma, M, n - 1, inverse)
    sp = _space_left(gamma, M, n)
    tail = inner.source

    def id_tensor_inner(word):
        return {(word[0],) + w: c for w, c in inner.apply({word[1:]: 1}).items()}

    first = GradedMap.from_function(sp, sp, p, id_tensor_inner)
    if not inverse:
        Y = _first_slot_comodule(gamma, tail)
    else:
        Y = diagonal_tensor([Comodule.regular(gamma)] * (n - 1) + [M])

    def outer(word):
        x, y = word[0], word[1:]
        out: Dict = {}
        for (a, b), c in Y.coaction(y).items():
            left = gamma.antipode(a) if inverse else {a: 1}
            for lab, c2 in gamma.mul({x: 1}, left).items():
                key = (lab,) + b
                out[key] = (out.get(key, 0) + c * c2) % p
        return out

    second = GradedMap.from_function(sp, sp, p, outer)
    return compose(second, first)


def shear_c_by_composition(gamma: HopfAlgebra, M: Comodule, n: int, inverse: bool = False) -> GradedMap:
    """S_cⁿ = S_c ∘ (S_c^{n−1}⊗id) and S_c⁻ⁿ = S_c⁻¹ ∘ (S_c^{−(n−1)}⊗id)."""
    from .hopf import diagonal_tensor

    p = gamma.p
    if n == 1:
        return (shear_c_inv if inverse else shear_c)(gamma, M).matrix
    inner = shear_c_by_composition(gamma, M, n - 1, inverse)
    sp = _space_right(gamma, M, n)
    head = inner.source

    def inner_tensor_id(word):
        return {w + (word[-1],): c for w, c in inner.apply({word[:-1]: 1}).items()}

    first = GradedMap.from_function(sp, sp, p, inner_tensor_id)
    if not inverse:
        Z = _last_slot_right_comodule(gamma, head)
    else:
        Z = _diagonal_right(gamma, M, n - 1)

    def outer(word):
        z, x = word[:-1], word[-1]
        out: Dict = {}
        for (z2, a), c in Z.coaction(z).items():
            left = gamma.antipode(a) if inverse else {a: 1}
            for lab, c2 in gamma.mul(left, {x: 1}).items():
                key = z2 + (lab,)
                out[key] = (out.get(key, 0) + c * c2) % p
        return out

    second = GradedMap.from_function(sp, sp, p, outer)
    return compose(second, first)


def _diagonal_right(gamma: HopfAlgebra, M: Comodule, k: int) -> Comodule:
    """Right diagonal coaction on M⊗Γ^{⊗k}: m|x₁|…|x_k ↦ Σ ± m′|x₁′|…|x_k′ ⊗ m″x₁″…x_k″."""
    from .hopf import koszul

    p = gamma.p
    space = _space_right(gamma, M, k)

    def coact(word):
        acc: Dict = {((), gamma.unit): 1}
        for idx, lab in enumerate(word):
            pieces = M.coaction(lab) if idx == 0 else {(a, b): c for (a, b), c in gamma.coproduct(lab).items()}
            nxt: Dict = {}
            for (done, g), c in acc.items():
                for (x1, x2), c2 in pieces.items():
                    r = gamma.mul_basis(g, x2)
                    if r is None:
                        continue
                    # x1 moves left past g
                    s = r[1] * koszul(gamma.degree(g), (M.degree(x1) if idx == 0 else gamma.degree(x1)))
                    key = (done + (x1,), r[0])
                    nxt[key] = (nxt.get(key, 0) + s * c * c2) % p
            acc = {kk: v for kk, v in nxt.items() if v}
        return acc

    return Comodule(gamma, space, coact, "right", space.name)


# ---------------------------------------------------------------- cosimplicial iso

def cosimplicial_shear_iso(DDelta, DL, phi: Optional[ComoduleAlgebra], N: Comodule) -> List[GradedMap]:
    """Levelwise S^{n+1} from D_Δ (over Φ ⊆ Γ) to D_L, checked against every coface and codegeneracy."""
    gamma = N.over
    p = gamma.p
    n_max = min(DDelta.n_max, DL.n_max)
    maps = []
    for n in range(n_max + 1):
        if phi is None:
            emb = lambda w: {w: 1}
        else:
            def emb(w, phi=phi):
                acc = {(): 1}
                for lab in w[:-1]:
                    acc = {k + (x,): c * c2 % p for k, c in acc.items() for x, c2 in phi.sub.embed_label(lab).items()}
                return {k + (w[-1],): c for k, c in acc.items()}

        def fn(w, n=n, emb=emb):
            out: Dict = {}
            for word, c in emb(w).items():
                for k, c2 in iterated_shear_element(gamma, N, word).items():
                    out[k] = (out.get(k, 0) + c * c2) % p
            return out
        maps.append(GradedMap.from_function(DDelta.levels[n], DL.levels[n], p, fn))
    for n in range(n_max):
        for i in range(n + 2):
            lhs = compose(maps[n + 1], DDelta.cofaces[n][i])
            rhs = compose(DL.cofaces[n][i], maps[n])
            if lhs != rhs:
                raise ShearError(f"does not commute: level {n}, coface {i}", witness=(n, "coface", i))
        for j in range(n + 1):
            lhs = compose(maps[n], DDelta.codegeneracies[n][j])
            rhs = compose(DL.codegeneracies[n][j], maps[n + 1])
            if lhs != rhs:
                raise ShearError(f"does not commute: level {n + 1}, codegeneracy {j}", witness=(n + 1, "codegeneracy", j))
    return maps


# ---------------------------------------------------------------- restrictions

def _embed_phi_word(phi: ComoduleAlgebra, word, p):
    acc = {(): 1}
    for lab in word[:-1]:
        acc = {k + (x,): c * c2 % p for k, c in acc.items() for x, c2 in phi.sub.embed_label(lab).items()}
    return {k + (word[-1],): c for k, c in acc.items()}


def shear_to_cotensor(quot: HopfQuotient, phi: ComoduleAlgebra, M: Comodule) -> ShearMap:
    """S restricted to Φ⊗M → Γ□_Σ M; raises if the image escapes or S is not bijective."""
    gamma = quot.gamma
    p = gamma.p
    src = tensor([phi.space, M.space], name=f"Φ⊗{M.name}")
    right = Comodule(quot.sigma, gamma.space, quot.right_sigma_coaction, "right", gamma.name)
    amb = tensor([gamma.space, M.space])
    target = GradedSubspace(amb, multi_cotensor_parts(amb, [right, quot.push(M)], p), p, f"Γ□{M.name}")

    def fn(word):
        img: Dict = {}
        for w, c in _embed_phi_word(phi, word, p).items():
            for k, c2 in iterated_shear_element(gamma, M, w).items():
                img[k] = (img.get(k, 0) + c * c2) % p
        img = {k: v for k, v in img.items() if v}
        try:
            return target.coordinates(img)
        except ValueError:
            raise ShearError(f"image escapes cotensor: S({src.fmt(word)})", witness=word) from None

    mat = GradedMap.from_function(src, target.space, p, fn)
    sm = ShearMap("S", 1, src, target.space, mat)
    if not sm.is_bijective():
        raise ShearError("restricted shear is not bijective")
    return sm


def normalized_phi_subspace(phi: ComoduleAlgebra, N: Comodule, s: int) -> GradedSubspace:
    """𝒩D_Φ^s(N): the part of Φ^{⊗s+1}⊗N killed by every adjacent multiplication."""
    from .fplin import Subspace, kernel
    p = phi.p
    amb = tensor([phi.space] * (s + 1) + [N.space])
    parts = {}
    for u in amb.degrees():
        if s == 0:
            parts[u] = Subspace.full(amb.dim(u), p)
            continue
        tgt_index: Dict = {}
        cols = []
        for w in amb.labels(u):
            vec = {}
            for j in range(s):
                for x, c in phi.mul_basis(w[j], w[j + 1]).items():
                    key = (j, w[:j] + (x,) + w[j + 2:])
                    idx = tgt_index.setdefault(key, len(tgt_index))
                    vec[idx] = (vec.get(idx, 0) + c) % p
            cols.append({k: v for k, v in vec.items() if v})
        parts[u] = kernel(SparseMatrix.from_columns(cols, len(tgt_index), p))
    return GradedSubspace(amb, parts, p, f"N D_Φ^{s}")


def g_cotensor_subspace(quot: HopfQuotient, G: KernelBicomodule, N: Comodule, s: int,
                        with_gamma: bool = True) -> GradedSubspace:
    """Γ□_Σ G(s)□_Σ N (or G(s)□_Σ N) inside the plain tensor power of Γ with N."""
    gamma = quot.gamma
    p = gamma.p
    right = Bicoaction(gamma.space, None, quot.right_sigma_coaction, gamma.name)
    gb = G.as_bicoaction()
    factors = ([right] if with_gamma else []) + [gb] * s + [quot.push(N)]
    amb = tensor([f.space for f in factors])
    return GradedSubspace(amb, multi_cotensor_parts(amb, factors, p), p, f"Γ□G({s})□{N.name}")


@dataclass
class NormalizedShearReport:
    s: int
    source: GradedSubspace
    target: GradedSubspace
    forward: GradedMap
    backward: GradedMap


def shear_normalized_to_G(quot: HopfQuotient, phi: ComoduleAlgebra, G: KernelBicomodule, N: Comodule,
                          s: int) -> NormalizedShearReport:
    """S^{s+1}: 𝒩D_Φ^s(N) → Γ□_Σ G(s)□_Σ N, with both inclusions checked."""
    gamma = quot.gamma
    p = gamma.p
    src = normalized_phi_subspace(phi, N, s)
    tgt = g_cotensor_subspace(quot, G, N, s)
    # target words are Γ-words, source words are Φ-words

    def fwd(lab):
        img: Dict = {}
        for w, c in src.embed_label(lab).items():
            for ww, c2 in _embed_phi_word(phi, w, p).items():
                for k, c3 in iterated_shear_element(gamma, N, ww).items():
                    img[k] = (img.get(k, 0) + c * c2 * c3) % p
        img = {k: v for k, v in img.items() if v}
        try:
            return tgt.coordinates(img)
        except ValueError:
            raise ShearError(f"image escapes Γ□G({s})□N: S({src.space.fmt(lab)})", witness=lab) from None

    # Φ^{⊗s+1}⊗N inside Γ^{⊗s+1}⊗N
    phi_amb = src.ambient
    gamma_words = tensor([gamma.space] * (s + 1) + [N.space])
    phi_in_gamma = {}
    for u in phi_amb.degrees():
        vecs = [gamma_words.to_vector(u, _embed_phi_word(phi, w, p)) for w in phi_amb.labels(u)]
        phi_in_gamma[u] = vecs

    from .fplin import Subspace
    phi_sub = GradedSubspace(gamma_words, {u: Subspace.span(v, gamma_words.dim(u), p)
                                           for u, v in phi_in_gamma.items()}, p, "Φ-words")

    def bwd(lab):
        img: Dict = {}
        for w, c in tgt.embed_label(lab).items():
            for k, c2 in iterated_shear_inv_element(gamma, N, w).items():
                img[k] = (img.get(k, 0) + c * c2) % p
        img = {k: v for k, v in img.items() if v}
        # μ_i ∘ S⁻¹ must vanish for i = 1..s (slot i-1 times slot i, 0-indexed)
        for i in range(1, s + 1):
            prod: Dict = {}
            for w, c in img.items():
                for x, c2 in gamma.mul({w[i - 1]: 1}, {w[i]: 1}).items():
                    key = w[:i - 1] + (x,) + w[i + 1:]
                    prod[key] = (prod.get(key, 0) + c * c2) % p
            if any(v for v in prod.values()):
                raise ShearError(f"μ_{i}∘S⁻¹ ≠ 0 on {tgt.space.fmt(lab)}", witness=lab)
        try:
            phi_coords = phi_sub.coordinates(img)
        except ValueError:
            raise ShearError(f"S⁻¹({tgt.space.fmt(lab)}) has a slot outside Φ", witness=lab) from None
        # translate Φ-basis coordinates (labelled by pivot Γ-words) back to Φ-words
        return {_pivot_to_phi_word(phi, k): v for k, v in phi_coords.items()}

    forward = GradedMap.from_function(src.space, tgt.space, p, fwd)
    back_amb = GradedMap.from_function(tgt.space, phi_amb, p, lambda lab: bwd(lab))
    backward = GradedMap.from_function(tgt.space, src.space, p,
                                       lambda lab: src.coordinates(back_amb.apply({lab: 1})))
    for u in set(src.space.degrees()) | set(tgt.space.degrees()):
        if src.dim(u) != tgt.dim(u):
            raise ShearError(f"dimension mismatch in degree {u}: {src.dim(u)} vs {tgt.dim(u)}", witness=u)
    ident_src = compose(backward, forward)
    if ident_src != GradedMap.identity(src.space, p):
        raise ShearError("S⁻¹∘S ≠ id on the normalized subspace")
    return NormalizedShearReport(s, src, tgt, forward, backward)


def _pivot_to_phi_word(phi: ComoduleAlgebra, gamma_word):
    # Φ basis vectors are rref rows labelled by their pivots, so tensor words of them are
    # again rref rows whose pivots are the words of pivot labels
    return gamma_word
