import math

import numpy as np
import pytest

from hyponorm.engine import OptimizerConfig
from hyponorm.linalg import TupleX


def random_tuple(rng: np.random.Generator, n: int, m: int, field: str = "real", s: float = 2.0) -> TupleX:
    data = rng.normal(size=(n, m))
    if field == "complex":
        data = data + 1j * rng.normal(size=(n, m))
    return TupleX.from_vectors(data, field=field, ground_exponent=s)


def rel_close(a: float, b: float, tol: float) -> bool:
    return abs(a - b) <= tol * max(1.0, abs(a), abs(b))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def fast_cfg():
    return OptimizerConfig(restarts=8, stall_window=8)


GROUNDS = (1.0, 2.0, math.inf)
