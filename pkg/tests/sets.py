"""Random sample-set generators shared by the tests."""

import numpy as np

from simplexgrad.geometry import AdaptedPair, SampleSet


def poised_dirs(rng, n, p, delta=1.0, max_cond=1e3):
    """p directions in R^n with max norm ``delta`` and direction matrix condition below max_cond."""
    while True:
        d = rng.normal(size=(p, n))
        s = np.linalg.svd(d, compute_uv=False)
        if s[-1] > 0 and s[0] / s[-1] < max_cond:
            return delta * d / np.max(np.linalg.norm(d, axis=1))


def rotated(rng, d, k, max_angle):
    """k ||d|| times a unit vector at angle <= max_angle from d."""
    n = d.size
    u = d / np.linalg.norm(d)
    if n == 1 or max_angle == 0:
        return k * d
    w = rng.normal(size=n)
    w -= (w @ u) * u
    w /= np.linalg.norm(w)
    t = rng.uniform(0, max_angle)
    return k * np.linalg.norm(d) * (np.cos(t) * u + np.sin(t) * w)


def random_pair(rng, y0, p, delta, k_range=(0.5, 2.0), max_angle=0.3, max_cond=1e3):
    """Adapted pair whose scheme matrix is reasonably conditioned."""
    n = y0.size
    while True:
        d = poised_dirs(rng, n, p, delta, max_cond)
        ks = rng.uniform(*k_range, size=p)
        t = np.array([rotated(rng, di, ki, max_angle) for di, ki in zip(d, ks)])
        A = d.T * ks**2 + t.T
        s = np.linalg.svd(A, compute_uv=False)
        if s[-1] > 0 and s[0] / s[-1] < max_cond:
            return AdaptedPair(SampleSet(y0, d), t)
