from fractions import Fraction

import numpy as np
import pytest

from bbgkz.geometry import GenericVector, GeometryError, choose_generic_v, normalized_volume
from bbgkz.pairing import (
    build_pairing_table,
    check_cocycle,
    closed_form_constant,
    cocycle_cases,
    evaluate_pairing,
    exhaustive_cocycle,
    flipped_xi,
    inverse_residual,
    log_identity_residual,
    xi,
)

from conftest import ALL_TRIANGULATIONS, cohomology, fixture

V = GenericVector((Fraction(9, 10), Fraction(1)))
TWO_PI_I = 2j * np.pi


def numeric_xi(cone, c, d, I, v, eps=1e-7):
    """Independent float version: test the two perturbed points directly."""
    if normalized_volume(cone, I) == 0:
        return 0
    M = np.array(cone.columns(I), dtype=float)
    vf = np.array([float(a) for a in v.coords])
    inside_c = np.all(np.linalg.solve(M, np.array(c, dtype=float) + eps * vf) > 0)
    inside_d = np.all(np.linalg.solve(M, np.array(d, dtype=float) - eps * vf) > 0)
    if inside_c and inside_d:
        return -1 if cone.degree(c) % 2 else 1
    return 0


def test_xi_examples():
    a1 = fixture("a1").cone
    assert xi(a1, (0, 0), (1, 2), (0, 1), V) == 1
    assert xi(a1, (1, 1), (0, 1), (0, 1), V) == 0
    r1 = fixture("rank1").cone
    assert xi(r1, (1,), (0,), (0,), GenericVector((Fraction(1, 2),))) == 0
    with pytest.raises(GeometryError):
        xi(a1, (0, 0), (1, 1), (0, 1), V)


@pytest.mark.parametrize("name", ["a1", "conifold", "rank2_n4", "local_p2"])
def test_xi_matches_numeric_oracle(name):
    cone = fixture(name).cone
    v = choose_generic_v(cone, 1)
    table = build_pairing_table(cone, v)
    for e in table.entries:
        assert e.coeff == numeric_xi(cone, e.c, e.d, e.I, v) * normalized_volume(cone, e.I)


def test_table_examples():
    r1 = fixture("rank1").cone
    table = build_pairing_table(r1, choose_generic_v(r1, 1))
    assert [(e.c, e.d, e.I, e.coeff) for e in table.entries] == [((0,), (1,), (0,), 1)]
    a1 = fixture("a1").cone
    assert build_pairing_table(a1, V).lookup()[((0, 0), (1, 2), (0, 1))] == 1


@pytest.mark.parametrize("name", ["a1", "conifold", "rank2_n4", "local_p2"])
def test_table_entries_are_bounded_and_signed(name):
    from bbgkz.geometry import enumerate_pairing_points
    from itertools import combinations

    cone = fixture(name).cone
    table = build_pairing_table(cone, choose_generic_v(cone, 2))
    bound = sum(len(enumerate_pairing_points(cone, I)) for I in combinations(range(cone.n), cone.rank) if normalized_volume(cone, I))
    assert 0 < len(table) <= bound
    for e in table.entries:
        assert abs(e.coeff) == normalized_volume(cone, e.I)
        assert np.sign(e.coeff) == (-1) ** cone.degree(e.c)


def test_cocycle_examples():
    a1 = fixture("a1").cone
    assert check_cocycle(a1, V, (1, 1), (2, 2), (0, 1, 2)) == 0
    cases = [(c, d) for J, c, d in cocycle_cases(a1) if a1.v_sum(J) == (3, 3)]
    assert cases
    for c, d in cases:
        assert check_cocycle(a1, V, c, d, (0, 1, 2)) == 0


@pytest.mark.parametrize("name", ["a1", "conifold", "rank2_n4", "local_p2"])
def test_cocycle_with_numeric_xi(name):
    cone = fixture(name).cone
    v = choose_generic_v(cone, 1)
    count, worst = exhaustive_cocycle(cone, v, numeric_xi)
    assert count > 0 and worst == 0


@pytest.mark.parametrize("name", ["a1", "conifold", "rank2_n4", "local_p2"])
def test_flipped_sign_is_detected(name):
    cone = fixture(name).cone
    v = choose_generic_v(cone, 1)
    e = build_pairing_table(cone, v).entries[0]
    _, worst = exhaustive_cocycle(cone, v, flipped_xi((e.c, e.d, e.I)))
    assert worst > 0


def test_evaluate_pairing_bilinear():
    a1 = fixture("a1").cone
    table = build_pairing_table(a1, V)
    x = [0.3, 1.7, 0.2]
    assert evaluate_pairing(table, lambda c: 0.0, lambda d: 1.0, x) == 0
    one = evaluate_pairing(table, lambda c: 1.0, lambda d: 1.0, x)
    two = evaluate_pairing(table, lambda c: 2.0, lambda d: 1.0, x)
    assert two == pytest.approx(2 * one)


def test_rank1_closed_form():
    coh = cohomology("rank1")
    table = build_pairing_table(coh.tri.cone, choose_generic_v(coh.tri.cone, 1))
    K = closed_form_constant(coh, table)
    assert K[0].shape == (1, 1)
    assert K[0][0, 0] == pytest.approx(1 / TWO_PI_I, abs=1e-15)
    assert inverse_residual(coh, K) <= 1e-15


@pytest.mark.parametrize("name,heights", ALL_TRIANGULATIONS)
def test_closed_form_inverts_euler_pairing(name, heights):
    coh = cohomology(name, heights)
    for seed in (1, 2):
        table = build_pairing_table(coh.tri.cone, choose_generic_v(coh.tri.cone, seed))
        K = closed_form_constant(coh, table)
        assert log_identity_residual(coh, K) <= 1e-8
        assert inverse_residual(coh, K) <= 1e-6


def test_a1_coarse_twisted_block():
    coh = cohomology("a1", "coarse")
    table = build_pairing_table(coh.tri.cone, V)
    K = closed_form_constant(coh, table)
    k = coh.index_of((1, 1))
    # (2 pi i)^2 K chi = 1 with chi(1, F13) = 1/8
    assert K[k][0, 0] == pytest.approx(1 / (TWO_PI_I**2 / 8), rel=1e-13)
