"""The interactive query/answer/refine loop, its records, logs and resume path."""

import math

import numpy as np
import pytest
from scipy.stats import kendalltau

from rulerank.choquet import MobiusCapacity, SubsetIndex
from rulerank.learner import (
    STATUS_COMPLETED,
    STATUS_INDIFFERENT,
    STATUS_INFEASIBLE,
    STATUS_RESOLVED,
    IterationRecord,
    SessionConfig,
    SessionResult,
    random_select,
    read_session_log,
    run_gbs,
    write_session_log,
)
from rulerank.oracles import hidden_choquet_oracle
from rulerank.versionspace import InfeasibleVersionSpace, add_preference, init_version_space


class ScriptedOracle:
    """Plays back a fixed answer sequence, recording what it was asked."""

    def __init__(self, answers):
        self.answers = list(answers)
        self.asked = []

    def answer(self, r_i, r_j):
        self.asked.append((r_i, r_j))
        return self.answers[len(self.asked) - 1]


@pytest.fixture(scope="module")
def d2_setup():
    rng = np.random.default_rng(3)
    features = rng.random((40, 2))
    index = SubsetIndex(2, 2)
    hidden = MobiusCapacity(index=index, coeffs=np.array([0.3, 0.5, 0.2]))
    rules = list(range(40))
    oracle = hidden_choquet_oracle(hidden, rules, features)
    return rules, features, hidden, oracle


class TestSessionConfig:
    def test_defaults(self):
        cfg = SessionConfig(k=2)
        assert cfg.center_kind == "chebyshev"
        assert cfg.selection == "bnb"
        assert cfg.max_iterations == 30
        assert cfg.search_ratio == 0.5

    @pytest.mark.parametrize("kwargs", [
        dict(k=0),
        dict(k=2, max_iterations=0),
        dict(k=2, search_ratio=0.0),
        dict(k=2, center_kind="centroid"),
        dict(k=2, selection="greedy"),
    ])
    def test_invalid_configs(self, kwargs):
        with pytest.raises(ValueError):
            SessionConfig(**kwargs)


class TestRecordsAndLogs:
    def test_record_json_round_trip(self):
        rec = IterationRecord(iteration=3, pair=(4, 9), answer=-1, r_max=0.125,
                              center=np.array([0.2, 0.8]), duration_s=0.01)
        back = IterationRecord.from_json_dict(rec.to_json_dict())
        assert back.iteration == 3 and back.pair == (4, 9) and back.answer == -1
        assert back.r_max == 0.125
        assert np.array_equal(back.center, rec.center)
        assert back.selection_ok is True

    def test_selection_ok_default_on_old_logs(self):
        data = {"iteration": 1, "pair": [0, 1], "answer": 1, "r_max": 0.5,
                "center": [0.5, 0.5], "duration_s": 0.0}
        assert IterationRecord.from_json_dict(data).selection_ok is True

    def test_log_file_round_trip(self, tmp_path):
        records = [
            IterationRecord(iteration=i, pair=(i, i + 1), answer=1, r_max=1.0 / (i + 1),
                            center=np.array([0.1 * i, 1 - 0.1 * i]), duration_s=0.0)
            for i in range(1, 4)
        ]
        path = tmp_path / "session.jsonl"
        write_session_log(records, path)
        assert len(path.read_text().strip().splitlines()) == 3
        back = read_session_log(path)
        assert [r.iteration for r in back] == [1, 2, 3]
        assert all(np.array_equal(a.center, b.center) for a, b in zip(records, back))


class TestFullSession:
    def test_realizable_d2_recovers_ranking(self, d2_setup):
        rules, features, hidden, oracle = d2_setup
        result = run_gbs(rules, features, oracle, SessionConfig(k=2, seed=0, max_iterations=25))
        assert result.status == STATUS_RESOLVED
        assert result.n_queries == 15
        # every comparison resolved: the learned order matches the hidden one
        tau, _ = kendalltau(result.capacity.scores(features), hidden.scores(features))
        assert tau == 1.0
        assert np.allclose(result.capacity.coeffs, hidden.coeffs, atol=0.02)

    def test_records_are_consecutive_and_radius_shrinks(self, d2_setup):
        rules, features, _, oracle = d2_setup
        result = run_gbs(rules, features, oracle, SessionConfig(k=2, seed=0, max_iterations=25))
        iters = [r.iteration for r in result.records]
        assert iters == list(range(1, len(iters) + 1))
        radii = [r.r_max for r in result.records]
        assert all(a >= b - 1e-12 for a, b in zip(radii, radii[1:]))
        pairs = [r.pair for r in result.records]
        assert len(set(pairs)) == len(pairs)  # no pair asked twice

    def test_final_capacity_is_valid_and_normalized(self, d2_setup):
        rules, features, _, oracle = d2_setup
        result = run_gbs(rules, features, oracle, SessionConfig(k=2, seed=1, max_iterations=10))
        assert result.capacity.coeffs.sum() == pytest.approx(1.0, abs=1e-12)
        result.capacity.validate()

    def test_random_selection_also_learns(self, d2_setup):
        rules, features, hidden, oracle = d2_setup
        cfg = SessionConfig(k=2, seed=4, selection="random", max_iterations=30)
        result = run_gbs(rules, features, oracle, cfg)
        tau, _ = kendalltau(result.capacity.scores(features), hidden.scores(features))
        assert tau > 0.5  # learns something, possibly less query-efficient

    def test_small_rule_set_resolves_by_exhaustion(self):
        features = np.array([[0.9, 0.1], [0.5, 0.5], [0.1, 0.9]])
        index = SubsetIndex(2, 2)
        hidden = MobiusCapacity(index=index, coeffs=np.array([0.7, 0.2, 0.1]))
        oracle = hidden_choquet_oracle(hidden, [0, 1, 2], features)
        result = run_gbs([0, 1, 2], features, oracle, SessionConfig(k=2, seed=0))
        assert result.status == STATUS_RESOLVED
        assert result.n_queries <= 3

    def test_exact_bound_mode_session(self, d2_setup):
        rules, features, hidden, oracle = d2_setup
        cfg = SessionConfig(k=2, seed=0, bound_mode="exact", max_iterations=20)
        result = run_gbs(rules, features, oracle, cfg)
        tau, _ = kendalltau(result.capacity.scores(features), hidden.scores(features))
        assert tau == 1.0

    def test_exact_cut_verification_session(self, d2_setup):
        rules, features, _, oracle = d2_setup
        cfg = SessionConfig(k=2, seed=0, exact_cut_verification=True, max_iterations=12)
        result = run_gbs(rules, features, oracle, cfg)
        assert result.status in (STATUS_RESOLVED, STATUS_COMPLETED)
        radii = [r.r_max for r in result.records]
        assert all(a >= b - 1e-12 for a, b in zip(radii, radii[1:]))

    def test_minkowski_center_session(self, d2_setup):
        rules, features, hidden, oracle = d2_setup
        cfg = SessionConfig(k=2, seed=0, center_kind="minkowski", max_iterations=15)
        result = run_gbs(rules, features, oracle, cfg)
        tau, _ = kendalltau(result.capacity.scores(features), hidden.scores(features))
        assert tau > 0.9


class TestStopping:
    def test_indifference_stops_after_third_answer(self, d2_setup):
        rules, features, _, _ = d2_setup
        oracle = ScriptedOracle([1, 1, 0])
        result = run_gbs(rules, features, oracle, SessionConfig(k=2, seed=0))
        assert result.status == STATUS_INDIFFERENT
        assert result.n_queries == 3
        assert result.records[-1].answer == 0

    def test_indifference_can_be_ignored(self, d2_setup):
        rules, features, _, _ = d2_setup
        oracle = ScriptedOracle([1, 0, 1, 0, 1])
        cfg = SessionConfig(k=2, seed=0, stop_on_indifference=False, max_iterations=5)
        result = run_gbs(rules, features, oracle, cfg)
        assert result.status == STATUS_COMPLETED
        assert result.n_queries == 5

    def test_budget_exhaustion_reports_completed(self, d2_setup):
        rules, features, _, oracle = d2_setup
        result = run_gbs(rules, features, oracle, SessionConfig(k=2, seed=0, max_iterations=4))
        assert result.status == STATUS_COMPLETED
        assert result.n_queries == 4

    def test_unsatisfiable_margin_turns_infeasible(self, d2_setup):
        rules, features, _, _ = d2_setup
        oracle = ScriptedOracle([1, 1, 1, 1])
        cfg = SessionConfig(k=2, seed=0, margin=10.0, max_iterations=6)
        result = run_gbs(rules, features, oracle, cfg)
        assert result.status == STATUS_INFEASIBLE
        assert result.n_queries == 1  # second center is already impossible
        result.capacity.validate()  # falls back to the last feasible center

    def test_infeasible_initial_constraints_raise(self, d2_setup):
        rules, features, _, oracle = d2_setup
        vs = init_version_space(SubsetIndex(2, 2))
        row = np.array([1.0, -1.0, 0.0])
        vs = add_preference(vs, (row, -0.5), 1)
        vs = add_preference(vs, (-row, -0.5), 2)
        with pytest.raises(InfeasibleVersionSpace):
            run_gbs(rules, features, oracle, SessionConfig(k=2, seed=0),
                    initial_constraints=vs)


class TestRandomSelect:
    def test_no_repeats_until_exhaustion(self):
        rng = np.random.default_rng(0)
        asked = set()
        for _ in range(6):  # C(4,2) pairs
            pair = random_select(4, asked, rng)
            assert pair is not None and pair not in asked
            asked.add(pair)
        assert random_select(4, asked, rng) is None

    def test_dense_asked_set_falls_back_to_enumeration(self):
        rng = np.random.default_rng(1)
        asked = {(0, 1), (0, 2)}
        assert random_select(3, asked, rng) == (1, 2)

    def test_deterministic_for_seed(self):
        a = [random_select(50, set(), np.random.default_rng(12)) for _ in range(5)]
        b = [random_select(50, set(), np.random.default_rng(12)) for _ in range(5)]
        assert a == b

    def test_needs_two_rules(self):
        with pytest.raises(ValueError):
            random_select(1, set(), np.random.default_rng(0))


class TestResume:
    def test_split_session_matches_uninterrupted_run(self, d2_setup):
        rules, features, _, oracle = d2_setup
        full = run_gbs(rules, features, oracle, SessionConfig(k=2, seed=5, max_iterations=8))
        assert full.n_queries == 8

        first = run_gbs(rules, features, oracle, SessionConfig(k=2, seed=5, max_iterations=4))
        resumed = run_gbs(
            rules, features, oracle, SessionConfig(k=2, seed=5, max_iterations=4),
            initial_constraints=first.constraints,
            start_iteration=5,
            asked={r.pair for r in first.records},
        )
        stitched = first.records + resumed.records
        assert [r.iteration for r in stitched] == [r.iteration for r in full.records]
        assert [r.pair for r in stitched] == [r.pair for r in full.records]
        assert [r.answer for r in stitched] == [r.answer for r in full.records]
        assert [r.r_max for r in stitched] == pytest.approx(
            [r.r_max for r in full.records], abs=1e-9)
        assert np.allclose(resumed.capacity.coeffs, full.capacity.coeffs, atol=1e-9)


class TestCallbacks:
    def test_select_and_record_hooks_in_lockstep(self, d2_setup):
        rules, features, _, oracle = d2_setup
        selected, recorded = [], []
        run_gbs(
            rules, features, oracle, SessionConfig(k=2, seed=0, max_iterations=5),
            on_select=lambda it, pair, center: selected.append((it, pair, center.radius)),
            on_record=lambda rec: recorded.append(rec),
        )
        assert len(selected) == len(recorded) == 5
        for (it, pair, radius), rec in zip(selected, recorded):
            assert rec.iteration == it
            assert rec.pair == pair
            assert rec.r_max == radius


class TestInputValidation:
    def test_feature_shape_checked(self, d2_setup):
        rules, features, _, oracle = d2_setup
        with pytest.raises(ValueError):
            run_gbs(rules, features[:, 0], oracle, SessionConfig(k=2))
        with pytest.raises(ValueError):
            run_gbs(rules[:5], features, oracle, SessionConfig(k=2))
        with pytest.raises(ValueError):
            run_gbs(rules[:1], features[:1], oracle, SessionConfig(k=2))

    def test_constraint_dimension_checked(self, d2_setup):
        rules, features, _, oracle = d2_setup
        wrong = init_version_space(SubsetIndex(3, 2))
        with pytest.raises(ValueError, match="dimension"):
            run_gbs(rules, features, oracle, SessionConfig(k=2), initial_constraints=wrong)
