import numpy as np
import pytest

import hammrl.backend as backend
from hammrl.distribution import ProbDistribution


@pytest.fixture(params=backend.available_backends())
def kernel_backend(request):
    """Run the decorated test once per available kernel backend."""
    with backend.use_backend(request.param):
        yield request.param


def random_distribution(rng: np.random.Generator, n_qubits: int,
                        max_support: int | None = None) -> ProbDistribution:
    """A random sparse distribution over distinct n-qubit strings."""
    space = 2 ** n_qubits
    if max_support is None:
        max_support = space
    size = int(rng.integers(1, min(space, max_support) + 1))
    values = rng.choice(space, size=size, replace=False)
    keys = [format(int(v), f"0{n_qubits}b") for v in values]
    weights = rng.random(size) + 1e-3  # bounded away from zero
    total = weights.sum()
    return ProbDistribution(
        {k: float(w / total) for k, w in zip(keys, weights)}, n_qubits=n_qubits
    )
