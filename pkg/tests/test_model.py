import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from quantdim import model
from quantdim.errors import InvalidSystem

from .conftest import random_systems
from .oracles import irreducible_by_powers


def kinds(system):
    return {v.kind for v in model.validate(system)}


def test_named_systems_are_valid(cantor, ring, skew):
    for s in (cantor, ring, skew):
        assert model.validate(s) == []


def test_row_not_stochastic_is_reported():
    s = model.MarkovSystem([[0.6, 0.5], [0.5, 0.5]], np.full((2, 2), 0.3), [0.5, 0.5])
    found = [v for v in model.validate(s) if v.kind == "RowNotStochastic"]
    assert [v.row for v in found] == [1]


def test_single_child_state_violates_cardinality():
    s = model.MarkovSystem([[1.0, 0.0], [0.5, 0.5]], [[0.3, 0.0], [0.3, 0.3]], [0.5, 0.5])
    found = [v for v in model.validate(s) if v.kind == "CardinalityCondition"]
    assert [v.row for v in found] == [1]


def test_violations_are_all_collected():
    s = model.MarkovSystem([[0.5, 0.5], [0.5, 0.5]], [[0.3, 0.0], [1.0, 0.3]], [0.2, 0.7])
    assert {"SupportMismatch", "ContractionOutOfRange", "InitialNotNormalized"} <= kinds(s)


def test_non_finite_entries_are_rejected():
    s = model.MarkovSystem([[0.5, np.nan], [0.5, 0.5]], np.full((2, 2), 0.3), [0.5, 0.5])
    assert "NonFinite" in kinds(s)


def test_shape_and_size_checks():
    assert "ShapeMismatch" in kinds(model.MarkovSystem(np.eye(2), np.eye(3), [1.0, 0.0]))
    assert "TooFewStates" in kinds(model.MarkovSystem([[1.0]], [[0.5]], [1.0]))


def test_zero_initial_weight_is_reported():
    s = model.MarkovSystem(np.full((2, 2), 0.5), np.full((2, 2), 0.3), [1.0, 0.0])
    assert "InitialNotPositive" in kinds(s)


def test_derived_constants_of_named_systems(cantor, ring, skew):
    dc = model.derived_constants(cantor)
    assert (dc.p_lo, dc.p_hi, dc.N1) == (0.5, 0.5, 2)
    assert dc.c_lo == dc.c_hi == pytest.approx(1 / 3, abs=0)
    dc = model.derived_constants(ring)
    assert (dc.p_lo, dc.c_lo, dc.N1) == (0.5, 0.25, 2)
    dc = model.derived_constants(skew)
    assert (dc.p_lo, dc.p_hi, dc.N1) == (0.25, 0.75, 5)


def test_derived_constants_require_validity():
    bad = model.MarkovSystem([[0.6, 0.5], [0.5, 0.5]], np.full((2, 2), 0.3), [0.5, 0.5])
    with pytest.raises(InvalidSystem):
        model.derived_constants(bad)


def test_irreducibility_examples(cantor, ring):
    assert model.is_irreducible(cantor)
    assert model.is_irreducible(ring)
    U = np.full((2, 2), 0.5)
    C = np.zeros((4, 4))
    C[:2, :2] = C[2:, 2:] = 0.3
    assert not model.is_irreducible(model.block_diagonal(U, U, C, np.full(4, 0.25)))


def test_irreducibility_matches_matrix_power_oracle():
    rng = np.random.default_rng(7)
    checked = 0
    for _ in range(200):
        n = int(rng.integers(2, 6))
        A = rng.random((n, n)) < 0.45
        A[np.arange(n), rng.integers(0, n, n)] = True
        A[np.arange(n), rng.integers(0, n, n)] = True
        if (A.sum(axis=1) < 2).any():
            continue
        P = A / A.sum(axis=1, keepdims=True)
        s = model.MarkovSystem(P, np.where(A, 0.2, 0.0), np.full(n, 1 / n))
        assert model.is_irreducible(s) == irreducible_by_powers(P)
        checked += 1
    assert checked > 100


def test_random_systems_are_valid_and_irreducible():
    for s in random_systems():
        assert model.validate(s) == []
        assert model.is_irreducible(s)
        assert model.derived_constants(s).p_lo >= 0.3


@given(st.integers(0, 10_000), st.permutations(range(4)))
def test_derived_constants_invariant_under_relabelling(seed, perm):
    s = model.random_system(np.random.default_rng(seed), n=4)
    assert model.derived_constants(s.permuted(perm)) == model.derived_constants(s)


@given(st.integers(0, 10_000))
def test_largest_probability_is_below_one(seed):
    s = model.random_system(np.random.default_rng(seed))
    assert model.derived_constants(s).p_hi < 1


def test_renormalized_fixes_row_sums():
    s = model.MarkovSystem([[1.0, 1.0], [1.0, 3.0]], np.full((2, 2), 0.3), [2.0, 2.0])
    assert "RowNotStochastic" in kinds(s)
    assert model.validate(model.renormalized(s)) == []


def test_closed_classes_and_restriction():
    U = np.full((2, 2), 0.5)
    C = np.zeros((4, 4))
    C[:2, :2] = 1 / 3
    C[2:, 2:] = 1 / 4
    s = model.block_diagonal(U, U, C, [0.1, 0.2, 0.3, 0.4])
    assert model.closed_classes(s) == [[1, 2], [3, 4]]
    sub = model.restrict(s, [3, 4])
    assert model.validate(sub) == []
    np.testing.assert_allclose(sub.q, [3 / 7, 4 / 7])
    with pytest.raises(InvalidSystem):
        model.restrict(model.cantor2(), [1])


def test_digest_depends_on_values(cantor, ring):
    assert cantor.digest() == model.cantor2().digest()
    assert cantor.digest() != ring.digest()
