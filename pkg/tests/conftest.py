import math

import numpy as np
import pytest

from s3forge.s3geom import CircleS3


def random_s3(rng, n):
    x = rng.normal(size=(n, 4))
    return x / np.linalg.norm(x, axis=1)[:, None]


def random_circle(rng, great=None, through=None):
    """Random circle of S^3; optionally great, optionally through a given point."""
    if great is None:
        great = bool(rng.integers(2))
    if through is not None:
        p = np.asarray(through, dtype=float)
        if great:
            v = rng.normal(size=4)
            v -= (v @ p) * p
            return CircleS3.great(p, v)
        q, r = random_s3(rng, 2)
        return CircleS3.through(p, q, r)
    if great:
        u, v = rng.normal(size=(2, 4))
        return CircleS3.great(u, v)
    # small circle: plane at distance h from the origin
    basis, _ = np.linalg.qr(rng.normal(size=(4, 4)))
    h = rng.uniform(0.05, 0.95)
    return CircleS3(h * basis[:, 0], basis[:, 1], basis[:, 2], math.sqrt(1 - h * h))


@pytest.fixture
def rng():
    return np.random.default_rng(20111)
