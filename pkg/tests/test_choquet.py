"""Subset ordering, augmentation, Choquet evaluation and capacity constraints."""

import math
from itertools import combinations

import numpy as np
import pytest

from rulerank.choquet import (
    MobiusCapacity,
    SubsetIndex,
    augment,
    augment_matrix,
    capacity_constraints,
    choquet_eval,
    preference_constraint,
)


def brute_choquet(index: SubsetIndex, coeffs: np.ndarray, f: np.ndarray) -> float:
    """Textbook Moebius sum, written independently of the vectorized path."""
    total = 0.0
    for subset, m in zip(index.subsets, coeffs):
        total += m * min(f[i] for i in subset)
    return total


class TestSubsetIndex:
    def test_canonical_order(self):
        index = SubsetIndex(3, 2)
        assert index.subsets == [(0,), (1,), (2,), (0, 1), (0, 2), (1, 2)]
        assert index.position[(0, 2)] == 4
        assert len(index) == 6

    def test_count_matches_binomials(self):
        for d in range(1, 8):
            for k in range(1, d + 1):
                assert SubsetIndex(d, k).size == SubsetIndex.count(d, k)
                assert SubsetIndex.count(d, k) == sum(
                    math.comb(d, s) for s in range(1, k + 1)
                )

    def test_invalid_arguments(self):
        with pytest.raises(ValueError):
            SubsetIndex(3, 0)
        with pytest.raises(ValueError):
            SubsetIndex(3, 4)

    def test_equality_by_shape(self):
        assert SubsetIndex(4, 2) == SubsetIndex(4, 2)
        assert SubsetIndex(4, 2) != SubsetIndex(4, 3)


class TestAugment:
    def test_subset_minima(self):
        index = SubsetIndex(3, 2)
        out = augment([0.2, 0.7, 0.5], index)
        assert np.allclose(out, [0.2, 0.7, 0.5, 0.2, 0.2, 0.5])

    def test_matrix_matches_rowwise(self):
        rng = np.random.default_rng(7)
        F = rng.random((20, 4))
        index = SubsetIndex(4, 3)
        mat = augment_matrix(F, index)
        for i in range(20):
            assert np.array_equal(mat[i], augment(F[i], index))

    def test_shape_errors(self):
        index = SubsetIndex(3, 2)
        with pytest.raises(ValueError):
            augment([0.1, 0.2], index)
        with pytest.raises(ValueError):
            augment_matrix(np.zeros((4, 2)), index)


class TestChoquetEval:
    def test_hand_value(self):
        # m({0})=0.3, m({1})=0.5, m({0,1})=0.2 at f=(1.0, 0.5):
        # 0.3*1 + 0.5*0.5 + 0.2*min(1, 0.5) = 0.65
        index = SubsetIndex(2, 2)
        m = MobiusCapacity(index=index, coeffs=np.array([0.3, 0.5, 0.2]))
        assert choquet_eval(m, [1.0, 0.5]) == pytest.approx(0.65)
        assert m([1.0, 0.5]) == pytest.approx(0.65)

    def test_additive_capacity_is_weighted_mean(self):
        index = SubsetIndex(4, 1)
        w = np.array([0.1, 0.2, 0.3, 0.4])
        m = MobiusCapacity(index=index, coeffs=w)
        rng = np.random.default_rng(0)
        for _ in range(25):
            f = rng.random(4)
            assert choquet_eval(m, f) == pytest.approx(float(w @ f))

    def test_matches_brute_force(self):
        rng = np.random.default_rng(11)
        for _ in range(200):
            d = int(rng.integers(2, 6))
            k = int(rng.integers(1, min(d, 3) + 1))
            index = SubsetIndex(d, k)
            coeffs = rng.standard_normal(index.size)
            f = rng.random(d)
            m = MobiusCapacity(index=index, coeffs=coeffs)
            assert choquet_eval(m, f) == pytest.approx(
                brute_choquet(index, coeffs, f), abs=1e-12
            )

    def test_scores_batch(self):
        index = SubsetIndex(3, 2)
        m = MobiusCapacity(index=index, coeffs=np.array([0.2, 0.2, 0.2, 0.2, 0.1, 0.1]))
        F = np.array([[1.0, 0.0, 0.5], [0.3, 0.3, 0.3]])
        scores = m.scores(F)
        assert scores.shape == (2,)
        assert scores[0] == pytest.approx(choquet_eval(m, F[0]))


class TestCapacityConstraints:
    def test_two_additive_rows(self):
        # d=2, k=2: monotonicity is m({i}) >= 0 and m({i}) + m({1,2}) >= 0
        # for both i, four distinct rows after dedup, stored negated.
        index = SubsetIndex(2, 2)
        system = capacity_constraints(index)
        assert system.n_eq == 1
        assert system.n_ineq == 4
        assert np.allclose(system.eq_coeffs, [[1.0, 1.0, 1.0]])
        assert np.allclose(system.eq_rhs, [1.0])
        rows = {tuple(row) for row in system.ineq_coeffs}
        assert rows == {
            (-1.0, 0.0, 0.0),
            (0.0, -1.0, 0.0),
            (-1.0, 0.0, -1.0),
            (0.0, -1.0, -1.0),
        }
        assert np.allclose(system.ineq_rhs, 0.0)

    def test_one_additive_dedups_to_nonnegativity(self):
        # With k=1 every coalition S yields the same row m({i}) >= 0.
        system = capacity_constraints(SubsetIndex(4, 1))
        assert system.n_ineq == 4
        assert np.allclose(system.ineq_coeffs, -np.eye(4))

    def test_uniform_capacity_feasible(self):
        for d, k in [(3, 2), (4, 2), (5, 3)]:
            index = SubsetIndex(d, k)
            system = capacity_constraints(index)
            uniform = np.zeros(index.size)
            uniform[:d] = 1.0 / d
            assert system.contains(uniform, tol=1e-12)


class TestValidate:
    def test_valid_capacity_passes(self):
        index = SubsetIndex(3, 2)
        coeffs = np.array([0.2, 0.3, 0.3, 0.1, 0.1, 0.0])
        MobiusCapacity(index=index, coeffs=coeffs).validate()

    def test_normalization_checked(self):
        index = SubsetIndex(2, 1)
        with pytest.raises(ValueError, match="normalized"):
            MobiusCapacity(index=index, coeffs=np.array([0.5, 0.6])).validate()

    def test_monotonicity_checked(self):
        index = SubsetIndex(2, 2)
        # sums to one but m({0}) < 0
        bad = MobiusCapacity(index=index, coeffs=np.array([-0.2, 0.7, 0.5]))
        with pytest.raises(ValueError, match="monotonicity"):
            bad.validate()

    def test_shape_checked_eagerly(self):
        with pytest.raises(ValueError):
            MobiusCapacity(index=SubsetIndex(2, 2), coeffs=np.array([0.5, 0.5]))


class TestCapacityJson:
    def test_keys_are_one_based_subsets(self):
        index = SubsetIndex(3, 2)
        m = MobiusCapacity(index=index, coeffs=np.arange(6, dtype=float))
        data = m.to_json_dict()
        assert data["d"] == 3 and data["k"] == 2
        assert data["coeffs"]["1"] == 0.0
        assert data["coeffs"]["1,3"] == 4.0
        assert set(data["coeffs"]) == {"1", "2", "3", "1,2", "1,3", "2,3"}

    def test_round_trip(self, tmp_path):
        index = SubsetIndex(4, 2)
        rng = np.random.default_rng(5)
        m = MobiusCapacity(index=index, coeffs=rng.standard_normal(index.size))
        path = tmp_path / "capacity.json"
        m.dump_json(path)
        back = MobiusCapacity.load_json(path)
        assert back.index == m.index
        assert np.array_equal(back.coeffs, m.coeffs)
        # serialization is stable byte-for-byte
        first = path.read_bytes()
        m.dump_json(path)
        assert path.read_bytes() == first


class TestPreferenceConstraint:
    def test_sign_convention(self):
        psi_i = np.array([1.0, 0.0, 0.5])
        psi_j = np.array([0.0, 1.0, 0.5])
        row, rhs = preference_constraint(psi_i, psi_j, answer=1)
        # answer=+1 means <w, psi_i - psi_j> >= 0, i.e. -(psi_i-psi_j) @ w <= 0
        assert np.allclose(row, [-1.0, 1.0, 0.0])
        assert rhs == 0.0
        row_neg, _ = preference_constraint(psi_i, psi_j, answer=-1)
        assert np.allclose(row_neg, -row)

    def test_margin_moves_rhs(self):
        row, rhs = preference_constraint(
            np.array([1.0, 0.0]), np.array([0.0, 1.0]), answer=1, margin=0.25
        )
        assert rhs == -0.25

    def test_rejects_vacuous_and_bad_answers(self):
        v = np.array([0.3, 0.3])
        with pytest.raises(ValueError, match="vacuous"):
            preference_constraint(v, v.copy(), answer=1)
        with pytest.raises(ValueError, match="answer"):
            preference_constraint(v, np.array([0.1, 0.2]), answer=0)

    def test_satisfied_by_preferring_capacity(self):
        # A capacity that genuinely scores psi_i above psi_j satisfies the row.
        index = SubsetIndex(2, 2)
        w = np.array([0.6, 0.3, 0.1])
        fi, fj = np.array([0.9, 0.2]), np.array([0.1, 0.8])
        psi_i, psi_j = augment(fi, index), augment(fj, index)
        answer = 1 if w @ psi_i > w @ psi_j else -1
        row, rhs = preference_constraint(psi_i, psi_j, answer)
        assert row @ w <= rhs + 1e-12
