"""Scikit-learn style wrappers: rule featurization and active rank learning."""

from __future__ import annotations

from typing import Sequence

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .learner import SessionConfig, run_gbs
from .measures import DEFAULT_MEASURES, MeasureKind, raw_feature_matrix
from .validation import as_feature_matrix, check_aligned, check_n_features


class RuleFeaturizer(TransformerMixin, BaseEstimator):
    """Turns association rules into min-max normalized interestingness columns.

    fit() learns, per measure, the column minimum and maximum over the
    training rules; transform() applies the same affine map to any rules
    (values from unseen rules may fall outside [0, 1]). Columns constant at
    fit time map to 0.5. Rows are preserved one-to-one; deduplication of
    identical feature vectors is a corpus-level concern, not a transform.
    """

    def __init__(self, measures: Sequence[MeasureKind] | None = None):
        self.measures = measures

    def _kinds(self) -> tuple[MeasureKind, ...]:
        kinds = DEFAULT_MEASURES if self.measures is None else self.measures
        return tuple(MeasureKind(k) for k in kinds)

    def fit(self, X, y=None):
        kinds = self._kinds()
        raw = raw_feature_matrix(list(X), kinds)
        self.kinds_ = kinds
        self.col_min_ = raw.min(axis=0)
        self.col_max_ = raw.max(axis=0)
        self.constant_columns_ = [
            i for i in range(raw.shape[1]) if self.col_max_[i] == self.col_min_[i]
        ]
        self.n_features_out_ = len(kinds)
        return self

    def transform(self, X) -> np.ndarray:
        check_is_fitted(self, "col_min_")
        raw = raw_feature_matrix(list(X), self.kinds_)
        span = self.col_max_ - self.col_min_
        out = np.empty_like(raw)
        for i in range(raw.shape[1]):
            if span[i] > 0:
                out[:, i] = (raw[:, i] - self.col_min_[i]) / span[i]
            else:
                out[:, i] = 0.5
        return out

    def get_feature_names_out(self, input_features=None) -> np.ndarray:
        check_is_fitted(self, "col_min_")
        return np.array([kind.value for kind in self.kinds_], dtype=object)


class ActiveChoquetRanker(BaseEstimator):
    """Learns a personal rule ranking by querying an oracle pair by pair.

    fit(X) runs the interactive loop over the given normalized feature
    matrix, asking ``oracle`` to compare rule pairs; the resulting capacity
    scores any feature matrix of the same width via predict().
    """

    def __init__(
        self,
        oracle=None,
        k: int = 2,
        center: str = "chebyshev",
        selection: str = "bnb",
        bound_mode: str = "paper",
        max_iterations: int = 30,
        stop_on_indifference: bool = True,
        exact_cut_verification: bool = False,
        search_ratio: float = 0.5,
        margin: float = 0.0,
        leaf_capacity: int = 8,
        seed: int | None = None,
    ):
        self.oracle = oracle
        self.k = k
        self.center = center
        self.selection = selection
        self.bound_mode = bound_mode
        self.max_iterations = max_iterations
        self.stop_on_indifference = stop_on_indifference
        self.exact_cut_verification = exact_cut_verification
        self.search_ratio = search_ratio
        self.margin = margin
        self.leaf_capacity = leaf_capacity
        self.seed = seed

    def _config(self) -> SessionConfig:
        return SessionConfig(
            k=self.k,
            center_kind=self.center,
            selection=self.selection,
            bound_mode=self.bound_mode,
            max_iterations=self.max_iterations,
            stop_on_indifference=self.stop_on_indifference,
            exact_cut_verification=self.exact_cut_verification,
            search_ratio=self.search_ratio,
            margin=self.margin,
            leaf_capacity=self.leaf_capacity,
            seed=self.seed,
        )

    def fit(self, X, y=None, rules: Sequence | None = None):
        """Run the interactive session. ``rules`` are the identities passed
        to the oracle; row indices are used when omitted."""
        if self.oracle is None:
            raise ValueError("an oracle is required to answer pairwise queries")
        X = as_feature_matrix(X)
        identities = list(rules) if rules is not None else list(range(X.shape[0]))
        check_aligned(identities, X.shape[0])
        result = run_gbs(identities, X, self.oracle, self._config())
        self.capacity_ = result.capacity
        self.log_ = result.records
        self.status_ = result.status
        self.version_space_ = result.constraints
        self.index_ = result.index
        self.n_features_in_ = X.shape[1]
        return self

    def predict(self, X) -> np.ndarray:
        """Choquet utility score per row under the learned capacity."""
        check_is_fitted(self, "capacity_")
        X = as_feature_matrix(X)
        check_n_features(X, self.n_features_in_)
        return self.capacity_.scores(X)

    def rank(self, X) -> np.ndarray:
        """Row indices sorted by descending score, ties by lower index."""
        return np.argsort(-self.predict(X), kind="stable")
