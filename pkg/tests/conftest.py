"""Shared fixtures: a seeded synthetic transaction corpus and mined rules."""

import numpy as np
import pytest

from rulerank.corpus import TransactionDatabase, loads_transactions, mine_rules
from rulerank.measures import feature_matrix


def synth_fimi(n=300, seed=0) -> str:
    """Deterministic FIMI text with planted item correlations.

    Items 1/2 co-occur strongly, 3 mostly implies 4, 5..7 are independent
    noise and 8/9/10 form a co-occurring triple -- enough structure that
    mining at moderate support yields a varied rule set.
    """
    rng = np.random.default_rng(seed)
    lines = []
    for _ in range(n):
        t = set()
        if rng.random() < 0.55:
            t.update((1, 2))
        if rng.random() < 0.40:
            t.add(3)
            if rng.random() < 0.8:
                t.add(4)
        for item in (5, 6, 7):
            if rng.random() < 0.3:
                t.add(item)
        if rng.random() < 0.25:
            t.update((8, 9, 10))
        if not t:
            t.add(11)
        lines.append(" ".join(str(i) for i in sorted(t)))
    return "\n".join(lines) + "\n"


@pytest.fixture(scope="session")
def fimi_text():
    return synth_fimi()


@pytest.fixture(scope="session")
def db(fimi_text):
    return loads_transactions(fimi_text)


@pytest.fixture(scope="session")
def mined_rules(db):
    rules = mine_rules(db, min_support=20, min_confidence=0.6)
    assert len(rules) > 30  # the fixtures below assume a non-trivial corpus
    return rules


@pytest.fixture(scope="session")
def fm(mined_rules):
    return feature_matrix(mined_rules)


@pytest.fixture
def tiny_db():
    # n=4, items 1 and 2 each in half the transactions, co-occurring twice.
    return TransactionDatabase([{1, 2}, {1, 2}, {3}, {4}])
