"""Shared test helpers."""

import numpy as np

from mcmc_certify.spectral import GridChain


def random_reversible_grid(n: int, gen: np.random.Generator) -> GridChain:
    """A random reversible chain from a symmetric positive flow matrix."""
    r = gen.uniform(0.1, 1.0, (n, n))
    flow = r + r.T
    flow /= flow.sum()
    pi = flow.sum(axis=1)
    return GridChain(points=np.arange(n, dtype=float), weights=pi / pi.sum(),
                     matrix=flow / pi[:, None], reversible=True)
