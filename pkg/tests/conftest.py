"""Shared helpers: an independent brute-force Born oracle and builders.

The oracle builds the full joint operator for every (a, l, x, e) combination
and never touches the steering-operator fast path, so the two routes check
each other.
"""

from itertools import product

import numpy as np
import pytest

from starcert.network import (
    Scenario,
    assemble_joint_state,
    effects_from_observable,
)
from starcert.tensor import kron_all


def born_oracle(scenario: Scenario, e: int) -> np.ndarray:
    """p(a, l | x, e) with shape (2^N, K, 3^N), by direct trace evaluation."""
    n = scenario.n_parties
    rho = assemble_joint_state(scenario)
    effects_by_party = []
    for triple in scenario.alice_observables:
        per_input = [effects_from_observable(a) for a in triple.observables()]
        effects_by_party.append(per_input)
    r_effects = scenario.eve[e].effects
    k = len(r_effects)
    out = np.empty((2**n, k, 3**n))
    for x in product(range(3), repeat=n):
        x_idx = int("".join(map(str, x)), 3)
        for a in product(range(2), repeat=n):
            a_idx = int("".join(map(str, a)), 2)
            alice_op = kron_all(
                [effects_by_party[i][x[i]][a[i]] for i in range(n)]
            )
            for l, r in enumerate(r_effects):
                op = kron_all([alice_op, r])
                out[a_idx, l, x_idx] = np.trace(rho @ op).real
    return out


@pytest.fixture
def rng():
    return np.random.default_rng(20260823)
