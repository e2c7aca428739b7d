"""Random interferometers and graphs for benchmark instances."""

import numpy as np


def haar_unitary(m, rng):
    """Haar-random ``m x m`` unitary from QR of a complex Ginibre matrix.

    The phases of ``diag(R)`` are folded back into ``Q`` so the result is
    Haar distributed rather than biased by the QR sign convention.
    """
    z = (rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def erdos_renyi(n, p, rng):
    """Symmetric 0/1 adjacency matrix with independent edges of probability ``p``."""
    if not 0 <= p <= 1:
        raise ValueError("edge probability must lie in [0, 1]")
    upper = np.triu(rng.random((n, n)) < p, 1)
    return (upper | upper.T).astype(float)
