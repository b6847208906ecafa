import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from zerocert import geometry as geo  # noqa: E402


def random_body(rng, d=None, kind=None):
    """A seeded random segment or polytope (d in {2, 3}, at most 6 vertices)."""
    d = d or int(rng.integers(2, 4))
    kind = kind or ("segment" if rng.random() < 0.4 else "polytope")
    if kind == "segment":
        a = rng.uniform(-2, 2, d)
        return geo.Segment(a, a + rng.uniform(-1.5, 1.5, d))
    k = int(rng.integers(d + 1, 7))
    return geo.Polytope(rng.uniform(-1.5, 1.5, (k, d)))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
