import numpy as np
import pytest

from prodform.bench import ORDER1, ORDER2, ORDER3, ORDER4, builtin_methods
from prodform.evaluator import spin_terms
from prodform.methods import parse_method


@pytest.fixture
def builtins():
    return builtin_methods()


@pytest.fixture
def third():
    return parse_method(ORDER3)


@pytest.fixture
def fourth():
    return parse_method(ORDER4)


@pytest.fixture
def second():
    return parse_method(ORDER2)


@pytest.fixture
def first():
    return parse_method(ORDER1)


@pytest.fixture
def spin():
    return spin_terms()


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)
