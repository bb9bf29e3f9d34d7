import math
from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from prodform.methods import Method, Unit, inverse_count, method_order, print_method, sigma_all
from prodform.search import (
    SearchConfig,
    SearchLimitError,
    StageLimits,
    distinct_permutations,
    min_inverses,
    search,
    stage_ordered,
    stage_signs,
    stage_split_signs,
)


@pytest.fixture(scope="module")
def third_order_results():
    return search(SearchConfig(I=9, candidates=(1, 2), target_order=3))


# -- configuration -----------------------------------------------------------

def test_config_validation():
    with pytest.raises(ValueError):
        SearchConfig(I=0)
    with pytest.raises(ValueError):
        SearchConfig(I=3, candidates=())
    with pytest.raises(ValueError):
        SearchConfig(I=3, candidates=(0, 1))
    with pytest.raises(ValueError):
        SearchConfig(I=3, target_order=5)
    with pytest.raises(ValueError):
        SearchConfig(I=3, tol=0)
    assert SearchConfig(I=3, candidates=(2, -1, 1)).candidates == (1.0, 2.0)


# -- stage 1 -----------------------------------------------------------------

def test_stage_signs_empty_for_two_units():
    assert stage_signs(SearchConfig(I=2, candidates=(1,), target_order=3)) == []


def test_stage_signs_contains_third_order_signature():
    ms = stage_signs(SearchConfig(I=9, candidates=(1, 2), target_order=3))
    assert tuple(sorted([1.0] * 8 + [-2.0])) in ms
    for combo in ms:
        assert sum(combo) > 0 and abs(sum(s**3 for s in combo)) <= 1e-9


@settings(max_examples=40, deadline=None)
@given(st.lists(st.integers(1, 4), min_size=1, max_size=3, unique=True), st.integers(1, 6))
def test_all_forward_third_order_impossible(cands, size):
    cfg = SearchConfig(I=size, candidates=tuple(cands), target_order=3, max_inverses=0)
    assert stage_signs(cfg) == []


def test_stage_limit_is_enforced():
    cfg = SearchConfig(I=9, candidates=(1, 2), limits=StageLimits(multisets=10))
    with pytest.raises(SearchLimitError):
        stage_signs(cfg)


# -- stage 2 -----------------------------------------------------------------

def test_split_signs_examples():
    cfg = SearchConfig(I=9, candidates=(1, 2), target_order=3)
    reals = stage_split_signs([tuple(sorted([1.0] * 8 + [-2.0]))], cfg)
    want = tuple(sorted([Unit(-1, -1)] * 2 + [Unit(1, 1)] * 6 + [Unit(2, -1)], key=lambda u: (u.a, u.alpha)))
    assert want in reals
    forward = Counter([Unit(1, 1)] * 8 + [Unit(-2, 1)])
    assert all(Counter(r) != forward for r in reals)
    for r in reals:
        assert sum(u.alpha * u.a**2 for u in r) == 0


def test_split_signs_fourth_order_adds_p4():
    cfg = SearchConfig(I=9, candidates=(1, 2), target_order=4)
    reals = stage_split_signs([tuple(sorted([1.0] * 8 + [-2.0]))], cfg)
    assert reals == []


# -- stage 3 -----------------------------------------------------------------

@pytest.mark.parametrize("counts", [[1], [2, 1], [3, 2, 1], [2, 2, 2], [0, 3, 1], [6, 2, 1]])
def test_distinct_permutations_complete(counts):
    rows = np.concatenate(list(distinct_permutations(counts, chunk=7)))
    n = math.factorial(sum(counts)) // math.prod(math.factorial(c) for c in counts)
    assert len(rows) == n
    assert len({r.tobytes() for r in rows}) == n
    for t, c in enumerate(counts):
        assert np.all((rows == t).sum(axis=1) == c)


def test_third_order_method_found(third_order_results, third):
    methods = [r.method for r in third_order_results]
    assert third in methods
    assert len(methods) == len(set(methods))


def test_results_reverify(third_order_results):
    for r in third_order_results:
        assert method_order(r.method, 1e-9) >= 3
        assert r.metrics.order >= 3
        assert r.sigma["1"] == pytest.approx(6.0)


def test_results_are_ranked(third_order_results):
    keys = [(r.metrics.Z, r.metrics.L / r.metrics.D, r.metrics.I) for r in third_order_results]
    assert keys == sorted(keys)


def test_transpose_flags(third_order_results):
    assert all(r.transpose in ("self", "pair", "") for r in third_order_results)
    assert sum(r.transpose == "pair" for r in third_order_results) % 2 == 0


def test_random_ordering_rejected(third):
    units = list(third.units)
    bad = units[::-1][1:] + units[-1:]
    s = sigma_all(Method(tuple(bad)))
    assert abs(s["12"]) > 1e-3 or abs(s["3"]) > 1e-3
    cfg = SearchConfig(I=9, candidates=(1, 2))
    assert all(r.method != Method(tuple(bad)) for r in stage_ordered([tuple(units)], cfg))


def test_second_order_target(second):
    results = search(SearchConfig(I=2, candidates=(1,), target_order=2))
    assert second in [r.method for r in results]
    assert all(r.transpose == "self" for r in results)


def test_max_results_truncates():
    full = search(SearchConfig(I=9, candidates=(1, 2), target_order=3))
    top = search(SearchConfig(I=9, candidates=(1, 2), target_order=3, max_results=5))
    assert [r.method for r in top] == [r.method for r in full[:5]]


def test_search_is_deterministic():
    a = search(SearchConfig(I=4, candidates=(1, 2), target_order=2))
    b = search(SearchConfig(I=4, candidates=(1, 2), target_order=2))
    assert [print_method(r.method) for r in a] == [print_method(r.method) for r in b]


@pytest.mark.parametrize("size, order", [(4, 2), (5, 2), (9, 3)])
def test_stage_soundness(size, order):
    cfg = SearchConfig(I=size, candidates=(1, 2), target_order=order)
    signs = set(stage_signs(cfg))
    reals = {frozenset(Counter(r).items()) for r in stage_split_signs(list(signs), cfg)}
    for r in search(cfg):
        assert tuple(sorted(u.alpha * u.a for u in r.method.units)) in signs
        assert frozenset(Counter(r.method.units).items()) in reals


# -- inverse bounds ----------------------------------------------------------

def test_min_inverses_third_order():
    bound = min_inverses(3, SearchConfig(I=9, candidates=(1, 2)))
    assert bound.minimum == 1
    assert inverse_count(bound.witness) == 1 and method_order(bound.witness, 1e-9) >= 3
    assert bound.checked[0][2] == 0


def test_min_inverses_zero_inverse_restriction_empty():
    assert search(SearchConfig(I=9, candidates=(1, 2), target_order=3, max_inverses=0)) == []
