from fractions import Fraction

import mpmath
import numpy as np
import pytest

from bbgkz.cohomology import (
    TWO_PI_I,
    CohomologyError,
    act_Hc,
    gamma_todd_residual,
    mul_H,
    presentation_json,
    total_divisor_residual,
)
from bbgkz.triangulation import box_size

from conftest import ALL_TRIANGULATIONS, cohomology


def test_a1_fine_presentation():
    coh = cohomology("a1", "fine")
    (s,) = coh.sectors
    assert s.H.labels() == ["1", "D3"]
    assert s.Hc.labels() == ["F{2}", "F{1,2}"]
    assert s.Hc.integrate(s.Hc.generator((0, 1))) == pytest.approx(1.0)
    assert s.Hc.integrate(s.Hc.generator((1,))) == 0


def test_a1_coarse_presentation():
    coh = cohomology("a1", "coarse")
    untw, tw = coh.sectors
    assert untw.Hc.exact_integral == [Fraction(1, 2)]
    assert tw.H.dim == tw.Hc.dim == 1
    assert tw.Hc.labels() == ["F{1,3}"]
    assert tw.Hc.integrate(tw.Hc.generator(())) == pytest.approx(1.0)


def test_a1_coarse_twisted_todd_and_euler_pairing():
    coh = cohomology("a1", "coarse")
    k = coh.index_of((1, 1))
    assert coh.todd(k)[0] == pytest.approx(0.25, abs=1e-15)
    one = coh[k].H.unit()
    f13 = coh[k].Hc.generator(())
    assert coh.chi({k: one}, {k: f13}) == pytest.approx(0.125, abs=1e-15)


def test_orbifold_todd_matches_mpmath():
    coh = cohomology("local_p2", "orbifold")
    for s in coh.sectors[1:]:
        q = mpmath.exp(-2j * mpmath.pi * mpmath.mpf(s.sector.coeffs[0].numerator) / s.sector.coeffs[0].denominator)
        assert coh.todd(s.index)[0] == pytest.approx(complex(1 / (1 - q) ** 3), abs=1e-14)


def test_rank1_presentation():
    coh = cohomology("rank1")
    assert coh.total_dim == 1
    s = coh[0]
    assert s.Hc.exact_integral == [1]
    assert coh.chi({0: s.H.unit()}, {0: s.Hc.generator((0,))}) == pytest.approx(1.0)


@pytest.mark.parametrize("name,heights", ALL_TRIANGULATIONS)
def test_rank_law(name, heights):
    coh = cohomology(name, heights)
    vol = coh.tri.cone.total_volume
    assert coh.total_dim == vol
    assert coh.total_compact_dim == vol
    for s in coh:
        assert s.H.dim == s.Hc.dim


@pytest.mark.parametrize("name,heights", ALL_TRIANGULATIONS)
def test_divisors_sum_to_zero_and_commute(name, heights):
    coh = cohomology(name, heights)
    for s in coh:
        assert total_divisor_residual(s.H) == 0
        for mod in (s.H, s.Hc):
            assert np.allclose(sum(mod.actions), 0, atol=1e-13)
            for A in mod.actions:
                for B in mod.actions:
                    assert np.allclose(A @ B, B @ A, atol=1e-13)


@pytest.mark.parametrize("name,heights", ALL_TRIANGULATIONS)
def test_linear_relations_hold(name, heights):
    # sum_i <m, v_i> D_i = 0 for every m, in every sector module
    coh = cohomology(name, heights)
    cone = coh.tri.cone
    for s in coh:
        for mod in (s.H, s.Hc):
            for a in range(cone.rank):
                op = sum(cone.points[i][a] * mod.actions[i] for i in range(cone.n))
                assert np.allclose(op, 0, atol=1e-13)


@pytest.mark.parametrize("name,heights", ALL_TRIANGULATIONS)
def test_module_structure(name, heights):
    coh = cohomology(name, heights)
    rng = np.random.default_rng(0)
    for s in coh:
        a = rng.normal(size=s.H.dim) + 0j
        b = rng.normal(size=s.H.dim) + 0j
        q = rng.normal(size=s.Hc.dim) + 0j
        lhs = act_Hc(s.H, s.Hc, a, act_Hc(s.H, s.Hc, b, q))
        rhs = act_Hc(s.H, s.Hc, mul_H(s.H, a, b), q)
        assert np.allclose(lhs, rhs, atol=1e-12)
        assert np.allclose(mul_H(s.H, s.H.unit(), a), a)


@pytest.mark.parametrize("name,heights", ALL_TRIANGULATIONS)
def test_integration_sees_only_top_degree(name, heights):
    coh = cohomology(name, heights)
    for s in coh:
        degs = s.Hc.degrees()
        assert np.all(s.Hc.integral[degs < s.Hc.degree_cap] == 0)
        for J in s.Hc.generators:
            if len(J) == s.Hc.degree_cap:
                val = s.Hc.integrate(s.Hc.generator(J))
                assert val == pytest.approx(float(1 / s.Hc.top_volume(J)))


@pytest.mark.parametrize("name,heights", ALL_TRIANGULATIONS)
def test_relations_are_homogeneous(name, heights):
    # sign-by-degree then maps the relation span onto itself
    coh = cohomology(name, heights)
    for s in coh:
        for mod, deg in ((s.H, len), (s.Hc, lambda sym: len(sym[0]) + len(sym[1]))):
            for row in mod._q.rows:
                degrees = {deg(mod._q.columns[k]) for k, x in enumerate(row) if x != 0}
                assert len(degrees) <= 1


@pytest.mark.parametrize("name,heights", ALL_TRIANGULATIONS)
def test_dual_star_is_an_involutive_ring_map(name, heights):
    coh = cohomology(name, heights)
    rng = np.random.default_rng(1)
    for s in coh:
        a = rng.normal(size=s.H.dim) + 1j * rng.normal(size=s.H.dim)
        b = rng.normal(size=s.H.dim) + 0j
        assert np.allclose(coh.dual_star(s.index, coh.dual_star(s.index, a)), a)
        lhs = coh.dual_star(s.index, mul_H(s.H, a, b))
        rhs = mul_H(s.H, coh.dual_star(s.index, a), coh.dual_star(s.index, b))
        assert np.allclose(lhs, rhs, atol=1e-12)


@pytest.mark.parametrize("name,heights", ALL_TRIANGULATIONS)
def test_gamma_hat_against_todd(name, heights):
    coh = cohomology(name, heights)
    for s in coh:
        assert gamma_todd_residual(coh, s.index) <= 1e-10


@pytest.mark.parametrize("name,heights", ALL_TRIANGULATIONS)
def test_gamma_hat_constant_term(name, heights):
    coh = cohomology(name, heights)
    for s in coh:
        ref = 1.0
        for g in s.sector.coeffs:
            ref *= float(mpmath.gamma(mpmath.mpf(g.numerator) / g.denominator))
        assert coh.gamma_hat(s.index)[0] == pytest.approx(ref, rel=1e-14)


@pytest.mark.parametrize("name,heights", ALL_TRIANGULATIONS)
def test_euler_pairing_is_nondegenerate(name, heights):
    coh = cohomology(name, heights)
    for s in coh:
        X = coh.chi_matrix(s.index)
        assert X.shape == (s.H.dim, coh[s.dual_index].Hc.dim)
        assert np.linalg.matrix_rank(X) == s.H.dim


def test_euler_pairing_weights_by_box_size():
    coh = cohomology("a1", "coarse")
    assert box_size(coh.tri, coh[1].sector.sigma) == 2
    # Td = 1 on the untwisted sector, so chi is the plain integral
    assert coh.chi({0: coh[0].H.unit()}, {0: coh[0].Hc.generator((0, 2))}) == pytest.approx(0.5)


def test_act_rejects_mismatched_sectors():
    coh = cohomology("a1", "coarse")
    with pytest.raises(CohomologyError):
        act_Hc(coh[0].H, coh[1].Hc, coh[0].H.unit(), coh[1].Hc.generator(()))


def test_presentation_json_is_serializable():
    import json

    doc = presentation_json(cohomology("local_p2", "orbifold"))
    assert len(doc) == 3
    json.dumps(doc)
    assert TWO_PI_I == 2j * np.pi
