import pytest

from hopfss.catalog import dual_steenrod_presentation, exterior_presentation
from hopfss.cobar import build_DDelta, build_DL, cotor
from hopfss.graded import GradedMap, compose
from hopfss.hopf import (Comodule, ComoduleAlgebra, Generator, HopfAlgebra, KernelBicomodule, Presentation,
                         comodule_algebra_from_cotensor, quotient_hopf)
from hopfss.shear import (ShearError, cosimplicial_shear_iso, iterated_shear, iterated_shear_c,
                          iterated_shear_c_inv, iterated_shear_inv, shear, shear_by_composition,
                          shear_c_by_composition, shear_inv, shear_normalized_to_G, shear_to_cotensor)


@pytest.fixture(scope="module")
def E12():
    return HopfAlgebra(exterior_presentation(3, 2, 12), "E")


@pytest.fixture(scope="module")
def A14():
    return HopfAlgebra(dual_steenrod_presentation(3, 1, 14), "A")


def identity(sp, p=3):
    return GradedMap.identity(sp, p)


def test_unit_slot_gives_coaction(A14):
    R = Comodule.regular(A14)
    S = shear(A14, R)
    for m in A14.basis():
        assert S.apply({(A14.unit, m): 1}) == A14.coproduct(m)


def test_shear_on_tau0_squared():
    E = HopfAlgebra(Presentation(3, 4, (Generator("tau0", 1, 2),), {}, {}, "E"))
    t = E.monomial("tau0")
    S = shear(E, Comodule.regular(E))
    assert S.apply({(t, t): 1}) == {(t, t): 1}


def test_shear_pair_is_inverse(A14):
    for M in (Comodule.trivial(A14), Comodule.regular(A14)):
        S, Si = shear(A14, M).matrix, shear_inv(A14, M).matrix
        assert compose(S, Si) == identity(S.source)
        assert compose(Si, S) == identity(S.source)


@pytest.mark.parametrize("which", ["E12", "A14"])
@pytest.mark.parametrize("regular", [False, True])
def test_closed_forms_equal_composed_shears(which, regular, request):
    h = request.getfixturevalue(which)
    M = Comodule.regular(h) if regular else Comodule.trivial(h)
    Mr = Comodule.regular(h, "right") if regular else Comodule.trivial(h, "right")
    for n in range(1, 5):
        S, Si = iterated_shear(h, M, n).matrix, iterated_shear_inv(h, M, n).matrix
        assert S == shear_by_composition(h, M, n)
        assert Si == shear_by_composition(h, M, n, inverse=True)
        assert compose(S, Si) == identity(S.source)
        assert compose(Si, S) == identity(S.source)
        Sc, Sci = iterated_shear_c(h, Mr, n).matrix, iterated_shear_c_inv(h, Mr, n).matrix
        assert Sc == shear_c_by_composition(h, Mr, n)
        assert Sci == shear_c_by_composition(h, Mr, n, inverse=True)
        assert compose(Sc, Sci) == identity(Sc.source)


def test_iterated_shear_n1_is_shear(A14):
    M = Comodule.regular(A14)
    assert iterated_shear(A14, M, 1).matrix == shear(A14, M).matrix


def test_two_fold_shear_on_exterior():
    E = HopfAlgebra(Presentation(3, 6, (Generator("x", 1, 2),), {}, {}, "E"))
    k = Comodule.trivial(E)
    assert iterated_shear(E, k, 2).matrix == shear_by_composition(E, k, 2)
    assert iterated_shear(E, k, 2).is_bijective()


def test_inverse_pair_on_larger_dual_steenrod():
    A = HopfAlgebra(dual_steenrod_presentation(3, 1, 16), "A")
    k = Comodule.trivial(A)
    for n in range(1, 5):
        S, Si = iterated_shear(A, k, n).matrix, iterated_shear_inv(A, k, n).matrix
        assert compose(Si, S) == identity(S.source)


def test_composition_oracle_detects_a_wrong_map(E12):
    # the oracle must see a difference when the map is not the shear
    k = Comodule.trivial(E12)
    S = iterated_shear(E12, k, 2).matrix
    assert S.scale(2) != shear_by_composition(E12, k, 2)


# ---------------------------------------------------------------- cosimplicial iso and restrictions

def _datum(h, killed):
    sig, q = quotient_hopf(h, killed)
    return sig, q, comodule_algebra_from_cotensor(h, sig, q), KernelBicomodule(q)


@pytest.mark.parametrize("which,killed", [("E12", ["tau1", "tau2"]), ("A14", ["xi1", "tau1"])])
def test_cosimplicial_iso_commutes(which, killed, request):
    h = request.getfixturevalue(which)
    sig, q, phi, G = _datum(h, killed)
    k = Comodule.trivial(h)
    DL = build_DL(h, k, 3)
    maps = cosimplicial_shear_iso(build_DDelta(phi, k, 3), DL, phi, k)
    assert len(maps) == 4


def test_cosimplicial_iso_for_phi_equal_gamma(A14):
    from hopfss.fplin import Subspace
    from hopfss.graded import GradedSubspace
    whole = GradedSubspace(A14.space, {u: Subspace.full(A14.space.dim(u), 3) for u in A14.space.degrees()}, 3)
    phi = ComoduleAlgebra(Comodule.regular(A14), whole, A14, "Γ")
    k = Comodule.trivial(A14)
    maps = cosimplicial_shear_iso(build_DDelta(phi, k, 3), build_DL(A14, k, 3), None, k)
    assert all(m.source.dims() == m.target.dims() for m in maps)


def test_cosimplicial_iso_detects_wrong_target(A14):
    sig, q, phi, G = _datum(A14, ["xi1", "tau1"])
    k = Comodule.trivial(A14)
    DL = build_DL(A14, k, 2)
    # swap two cofaces; the shear can no longer intertwine them
    DL.cofaces[1][0], DL.cofaces[1][1] = DL.cofaces[1][1], DL.cofaces[1][0]
    with pytest.raises(ShearError, match="does not commute") as err:
        cosimplicial_shear_iso(build_DDelta(phi, k, 2), DL, phi, k)
    assert err.value.witness[1] == "coface"


def test_shear_to_cotensor(A14):
    E = HopfAlgebra(exterior_presentation(3, 1, 10), "E")
    sig, q, phi, G = _datum(E, ["tau1"])
    sm = shear_to_cotensor(q, phi, Comodule.trivial(E))
    assert sm.source.dims() == phi.space.dims()
    assert sm.is_bijective()
    sig, q, phi, G = _datum(A14, ["xi1", "tau1"])
    sm = shear_to_cotensor(q, phi, phi.comodule)
    assert sm.is_bijective()
    # restriction coherence: on Φ⊗k the restricted map is S itself
    sm = shear_to_cotensor(q, phi, Comodule.trivial(A14))
    assert sm.source.dims() == phi.space.dims()


@pytest.mark.parametrize("which,killed,s_top", [("E12", ["tau1", "tau2"], 2), ("A14", ["xi1", "tau1"], 2)])
def test_shear_normalized_to_G(which, killed, s_top, request):
    h = request.getfixturevalue(which)
    sig, q, phi, G = _datum(h, killed)
    k = Comodule.trivial(h)
    for s in range(s_top + 1):
        r = shear_normalized_to_G(q, phi, G, k, s)
        assert r.source.space.dims() == r.target.space.dims()
        assert compose(r.forward, r.backward) == identity(r.target.space)


def test_shear_normalized_s0_is_cotensor():
    E = HopfAlgebra(exterior_presentation(3, 1, 10), "E")
    sig, q, phi, G = _datum(E, ["tau1"])
    k = Comodule.trivial(E)
    r = shear_normalized_to_G(q, phi, G, k, 0)
    assert r.source.space.dims() == shear_to_cotensor(q, phi, k).source.dims()
    r1 = shear_normalized_to_G(q, phi, G, k, 1)
    assert all(u <= 10 for u in r1.source.space.degrees())


def test_cotor_independent_of_resolution_model():
    from hopfss.cobar import cotensor_complex
    from hopfss.fplin import Subspace
    from hopfss.graded import GradedSubspace
    A = HopfAlgebra(dual_steenrod_presentation(3, 1, 10), "A")
    k, kr = Comodule.trivial(A), Comodule.trivial(A, "right")
    whole = GradedSubspace(A.space, {u: Subspace.full(A.space.dim(u), 3) for u in A.space.degrees()}, 3)
    phi = ComoduleAlgebra(Comodule.regular(A), whole, A, "Γ")
    want = {key: v for key, v in cotor(A, kr, k, 2).dims.items()}
    for cos in (build_DL(A, k, 3), build_DDelta(phi, k, 3)):
        cc, _ = cotensor_complex(kr, cos.alternating_complex())
        got = {key: v for key, v in cc.homology_dims(range(3)).items()}
        assert got == want
