import pytest

from hopfss.cobar import ChainMap, ComplexError
from hopfss.fplin import SparseMatrix, rank
from hopfss.graded import GradedSpace
from hopfss.hopf import Comodule
from hopfss.specseq import (ExtensionDatum, NilpotentError, UnsupportedError, build_cess, build_filtss,
                            build_mpass_e1, cess_e1_module_chart, cotor_class, cotor_module_chart, delta_beta,
                            e0_column_matches_sigma_model, e0_complex, e0_sigma_dependence,
                            flatness_check_and_e2, g_power_module, localize, theta)
from oracles import cotor_dims, dense_dual_steenrod, dense_exterior


def below(table, n_lt, u_lt=10 ** 9):
    return {k: v for k, v in table.items() if k[0] + k[1] < n_lt and k[2] < u_lt}


@pytest.fixture(scope="module")
def small_models(ext_small):
    n = 8
    return build_cess(ext_small, n), build_filtss(ext_small, n), build_mpass_e1(ext_small, n)


@pytest.fixture(scope="module")
def dual_models(dual_a):
    n = dual_a.D
    return build_cess(dual_a, n), build_filtss(dual_a, n), build_mpass_e1(dual_a, n)


# ---------------------------------------------------------------- page structure

@pytest.mark.parametrize("which", ["small_models", "dual_models"])
def test_pages_are_consistent(which, request):
    cess, filt, mp = request.getfixturevalue(which)
    for ss in (cess.pages, filt.pages):
        ss.check_differentials_square_zero()
        ss.check_bookkeeping()
        ss.check_convergence()
    cess.total.check()
    filt.total.check()


@pytest.mark.parametrize("which", ["small_models", "dual_models"])
def test_three_E1_tables_agree(which, request):
    cess, filt, mp = request.getfixturevalue(which)
    n = cess.n_max - 1
    e1 = below(cess.pages.pages[1].table, n)
    assert e1 == below(filt.pages.pages[1].table, n)
    assert e1 == below(mp.dims, n)
    assert e1 == below(cess.e1_cotor, n) == below(cess.e1_sigma, n)
    for cell in set(mp.d1) | set(cess.pages.pages[1].d):
        if sum(cell[:2]) < n - 1:
            m = cess.pages.pages[1].d.get(cell)
            assert mp.d1_rank(cell) == (rank(m) if m is not None else 0)
    assert all(a.passed for a in mp.assertions), [a for a in mp.assertions if not a.passed]


def test_filtration_ss_converges_to_oracle_cotor(dual_models, dual_a):
    cess, filt, mp = dual_models
    want = cotor_dims(dense_dual_steenrod(3, 1, dual_a.D), 6)
    got = {(n, u): h for (n, u), h in filt.pages.homology.items() if h and n <= 6}
    assert got == want


def test_zero_column_is_cotor_of_sigma(dual_models, small_models):
    # Σ = E[τ₀] in both examples: one class at (0, t, t)
    for cess, filt, mp in (small_models, dual_models):
        n = cess.n_max - 1
        col = {k: v for k, v in below(filt.pages.pages[1].table, n).items() if k[0] == 0}
        assert col == {(0, t, t): 1 for t in range(n)}
    assert cotor_dims(dense_exterior(3, [1], 12), 5) == {(t, t): 1 for t in range(6)}


def test_dual_a_E1_vanishes_off_the_axes(dual_models, dual_a):
    cess, filt, mp = dual_models
    nb, ub = cess.certified
    off = {k: v for k, v in below(cess.pages.pages[1].table, nb - 1, ub).items() if k[0] > 0 and k[1] > 0}
    assert off == {}


def test_schedule_independence(ext_small):
    a = build_cess(ext_small, 6, jobs=1)
    b = build_cess(ext_small, 6, jobs=4)
    for r in range(4):
        assert list(a.pages.pages[r].table.items()) == list(b.pages.pages[r].table.items())


# ---------------------------------------------------------------- θ

@pytest.mark.parametrize("which,datum", [("small_models", "ext_small"), ("dual_models", "dual_a")])
def test_theta_report(which, datum, request):
    cess, filt, mp = request.getfixturevalue(which)
    d = request.getfixturevalue(datum)
    th = theta(d, cess.n_max - 1, cess=cess, filt=filt)
    assert th.ok, [a for a in th.assertions if not a.passed]
    assert [a.name for a in th.assertions] == ["θ is a chain map", "θ preserves filtration",
                                              "θ induces a bijection on E₁"]
    assert all(a == b == r for a, b, r in th.e1_ranks.values())


def test_theta_in_degree_zero_is_the_unit(small_models, ext_small):
    cess, filt, mp = small_models
    th = theta(ext_small, cess.n_max - 1, cess=cess, filt=filt)
    src, tgt = cess.total, filt.total
    # term 0 is k□(Φ⊗k) ≅ Φ = E[τ₁]; ε keeps the unit and kills τ₁
    assert src.terms[0].dims() == {0: 1, 5: 1}
    [lab] = src.terms[0].labels(0)
    [img] = tgt.terms[0].labels(0)
    assert th.maps[0].apply({lab: 1}) == {img: 1}
    [t1] = src.terms[0].labels(5)
    assert th.maps[0].apply({t1: 1}) == {}


def test_perturbed_theta_is_not_a_chain_map(small_models, ext_small):
    cess, filt, mp = small_models
    th = theta(ext_small, cess.n_max - 1, cess=cess, filt=filt)
    maps = list(th.maps)
    maps[1] = maps[1].scale(2)
    with pytest.raises(ComplexError, match="not a chain map"):
        ChainMap(th.chain_map.source, th.chain_map.target, maps, "θ'").check()


def test_theta_needs_trivial_M(ext_small):
    g = ext_small.gamma
    d = ExtensionDatum(g, ext_small.killed, M=Comodule.regular(g, "right"))
    with pytest.raises(UnsupportedError):
        theta(d, 3)


# ---------------------------------------------------------------- δ and β

@pytest.mark.parametrize("datum", ["ext_small", "dual_a"])
def test_delta_beta(datum, request):
    d = request.getfixturevalue(datum)
    for s in range(3):
        r = delta_beta(d, s, 8)
        assert r.ok, [a for a in r.assertions if not a.passed]
        assert r.checked_squares > 0
        assert any(a.name.startswith("square") for a in r.assertions)


def _induced_rank(src, tgt, f, n, u, p):
    hs, ht = src.homology(n, u), tgt.homology(n + 1, u)
    cols = [ht.coordinates(f.block(u).apply(x)) for x in hs.representatives]
    return hs.dim, ht.dim, rank(SparseMatrix.from_columns(cols, ht.dim, p))


def test_delta_is_a_homology_isomorphism_and_zero_is_not(ext_small):
    d = ext_small
    top = 8
    r = delta_beta(d, 1, top)
    src = e0_complex(d, 0, g_power_module(d, 1)[0], top + 1)
    tgt = e0_complex(d, 1, g_power_module(d, 0)[0], top + 1)
    maps = r.delta_maps[0]
    nonzero = 0
    for n in range(len(maps) - 1):
        for u in src.terms[n].degrees():
            a, b, rk = _induced_rank(src, tgt, maps[n], n, u, d.p)
            assert a == b == rk
            if a:
                nonzero += 1
                zero = maps[n].scale(0)
                assert _induced_rank(src, tgt, zero, n, u, d.p)[2] == 0
    assert nonzero > 0


def _twisted_N(gamma):
    t1 = gamma.monomial("tau1")
    sp = GradedSpace({0: [("1",)], 5: [("y",)]}, gamma.max_degree, name="N", formatter=lambda l: l[0])

    def coact(l):
        if l == ("1",):
            return {(gamma.unit, l): 1}
        return {(gamma.unit, ("y",)): 1, (t1, ("1",)): 1}
    return sp, Comodule(gamma, sp, coact, "left", "N")


def test_E0_depends_only_on_sigma_coaction(ext_small):
    g = ext_small.gamma
    sp, N = _twisted_N(g)
    flat = Comodule(g, sp, lambda l: {(g.unit, l): 1}, "left", "Nt")
    assert N.validate().ok and flat.validate().ok
    rep = e0_sigma_dependence(ext_small, N, flat, 6)
    assert rep.identical and rep.columns > 0
    for s in range(3):
        assert e0_column_matches_sigma_model(ext_small, s, 6, N) is None


# ---------------------------------------------------------------- localization

def test_localized_cotor_is_laurent(dual_a):
    A = dual_a.gamma
    x = cotor_class(A, ["tau0"], dual_a.D)
    ch = cotor_module_chart(A, Comodule.trivial(A, "left"), x, dual_a.D)
    L = localize(ch, x, u_max=dual_a.localize_below - 1)
    assert L.certified_cells() == {(0, s, s): 1 for s in range(dual_a.localize_below)}
    for cell in L.certificates:
        assert L.cells.get(cell, 0) == (1 if cell[1] == cell[2] else 0)
    again = localize(L)
    assert again.rows() == L.rows()


def test_localized_E1_is_concentrated_in_column_zero(dual_a):
    A = dual_a.gamma
    x = cotor_class(A, ["tau0"], dual_a.D)
    L = localize(cess_e1_module_chart(dual_a, x, dual_a.D), x, u_max=dual_a.localize_below - 1)
    assert {c: v for c, v in L.certified_cells().items() if v and c[0] > 0} == {}
    assert {c: v for c, v in L.certified_cells().items() if v} == {(0, s, s): 1 for s in range(dual_a.localize_below)}


def test_nilpotent_class_is_rejected(dual_a):
    A = dual_a.gamma
    ch = cotor_module_chart(A, Comodule.trivial(A, "left"), cotor_class(A, ["tau0"], 8), 8)
    with pytest.raises(NilpotentError):
        localize(ch, cotor_class(A, ["xi1"], 8))


# ---------------------------------------------------------------- flatness

def test_flatness_and_product_E2(ext_small):
    r = flatness_check_and_e2(ext_small)
    assert r.free and r.e2_checked and r.ok, [a for a in r.assertions if not a.passed]
    cess = build_cess(ext_small, 12, r_max=2)
    nb, ub = cess.certified
    # F₃[a₀]⊗F₃[a₁]: a₀ in (s,t,u) = (0,1,1), a₁ in (1,0,5)
    want = {(s, t, t + 5 * s): 1 for s in range(13) for t in range(13) if t + 5 * s <= 12 and s + t < nb - 1}
    assert below(cess.pages.pages[2].table, nb - 1, ub) == want
    assert below(cess.pages.infinity.table, nb - 1, ub) == want


def test_flatness_obstruction_on_dual_a(dual_a):
    r = flatness_check_and_e2(dual_a, localize_at=["tau0"])
    assert not r.free and r.witness
    assert r.localized, r.localized_witness
