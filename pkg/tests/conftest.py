import json
from fractions import Fraction

import pytest

import vldsrc


@pytest.fixture
def skewed():
    return vldsrc.skewed_triple()


@pytest.fixture
def two_row():
    return vldsrc.point_uniform8()


@pytest.fixture
def float_skewed():
    doc = {
        "mode": "float",
        "x_alphabet": ["1", "2", "3"],
        "y_alphabet": ["0"],
        "pmf": [[0.5], [1 / 3], [1 / 6]],
    }
    return vldsrc.load_source(json.dumps(doc))


@pytest.fixture
def sixth():
    return Fraction(1, 6)
