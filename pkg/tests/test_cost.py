import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from prodform.cost import (
    CostParams,
    MethodMetrics,
    applications_model,
    applications_needed,
    computer_time,
    error_scalar_R,
    gate_factor_Z,
    method_metrics,
    rank_key,
)
from prodform.evaluator import HamiltonianTerms, method_error
from prodform.methods import Method, parse_method, sigma_all


def test_R_first_and_second(first, second):
    assert error_scalar_R(first) == 1.0
    assert error_scalar_R(second) == pytest.approx(math.sqrt(5))


def test_R_third_order(third):
    s = sigma_all(third)
    want = math.sqrt(s["4"] ** 2 + s["13"] ** 2 + s["112"] ** 2)
    assert error_scalar_R(third) == pytest.approx(want)
    # frozen from the free Lie reference: sigma^4 = -12, sigma^13 = -6, sigma^112 = -1
    assert want == pytest.approx(math.sqrt(181))


def test_R_undefined_at_order_zero():
    with pytest.raises(ValueError):
        error_scalar_R(parse_method("(1)(-1)"))


@pytest.mark.parametrize(
    "name, D, L, I, o, inv",
    [("first", 1, 1, 1, 1, 0), ("second", 2, 2, 2, 2, 0), ("third", 6, 10, 9, 3, 1), ("fourth", 12, 20, 18, 4, 2)],
)
def test_builtin_metrics(name, D, L, I, o, inv, request):
    m = method_metrics(request.getfixturevalue(name), 3)
    assert (m.D, m.L, m.I, m.order, m.inverses) == (D, L, I, o, inv)
    assert m.G == 3 * I and m.N == 3


def test_metrics_validation(first):
    with pytest.raises(ValueError):
        method_metrics(first, 0)
    with pytest.raises(ValueError):
        MethodMetrics(D=2, L=1, I=1, order=1, R=1, G=1)
    with pytest.raises(ValueError):
        MethodMetrics(D=1, L=1, I=1, order=1, R=-1, G=1)


def test_Z_examples(first, second):
    assert gate_factor_Z(method_metrics(first, 3)) == pytest.approx(3.0)
    assert method_metrics(second, 3).Z == pytest.approx(3 * math.sqrt(math.sqrt(5) / 2))
    assert gate_factor_Z(MethodMetrics(D=2, L=2, I=2, order=2, R=0, G=6)) == 0.0
    with pytest.raises(ValueError):
        gate_factor_Z(MethodMetrics(D=-1, L=1, I=1, order=1, R=1, G=1))


def test_params_validation():
    CostParams(t_g=0, b=0, T_p=1, E_target=1e-4)
    for bad in [dict(t_g=-1), dict(b=-1), dict(T_p=0), dict(E_target=0)]:
        kw = dict(t_g=1, b=1, T_p=1, E_target=1e-4) | bad
        with pytest.raises(ValueError):
            CostParams(**kw)


def test_computer_time_first_order(first):
    c = computer_time(method_metrics(first, 3), CostParams(t_g=1, b=0, T_p=1, E_target=1e-4))
    assert c.total == pytest.approx(3e4)
    assert c.application == 0.0 and c.switching == c.total


def test_computer_time_limits(third):
    met = method_metrics(third, 3)
    app_only = met.L * 2.0 * 5.0 / met.D
    assert computer_time(met, CostParams(0, 2.0, 5.0, 1e-4)).total == pytest.approx(app_only)
    assert computer_time(met, CostParams(1e-6, 2.0, 5.0, 1e300)).total == pytest.approx(app_only, rel=1e-12)


def test_applications_model_first_order(first):
    assert applications_model(method_metrics(first, 3), 1.0, 1e-4) == pytest.approx(1e4)


def test_commuting_needs_one_application(builtins):
    h = HamiltonianTerms((np.diag([1.0, -2.0]), np.diag([0.5, 3.0])))
    for m in builtins:
        n, err = applications_needed(m, h, 1.0, 1e-4)
        assert n == 1 and err <= 1e-12


def test_applications_first_order_small_budget(spin, first):
    n, err = applications_needed(first, spin, 1.0, 1e-2)
    assert err <= 1e-2
    assert method_error(first, spin, 1.0 / (n - 1), n - 1) > 1e-2


def test_applications_ceiling(spin, first):
    with pytest.raises(RuntimeError):
        applications_needed(first, spin, 1.0, 1e-4, ceiling=100)
    with pytest.raises(ValueError):
        applications_needed(first, spin, 0.0, 1e-4)
    with pytest.raises(ValueError):
        applications_needed(parse_method("(-1)"), spin, 1.0, 1e-4)


@pytest.mark.parametrize("name", ["first", "second", "third", "fourth"])
def test_error_non_increasing_in_n(name, spin, request):
    m = request.getfixturevalue(name)
    d = sigma_all(m)["1"]
    errs = np.array([method_error(m, spin, 1.0 / (n * d), n) for n in range(1, 80)])
    # allow for rounding once the error reaches ~1e-13
    assert np.all(np.diff(errs) <= 1e-14)


@pytest.mark.parametrize("name, E", [("first", 1e-3), ("second", 1e-5), ("third", 1e-7), ("fourth", 1e-8)])
def test_precision_scaling_law(name, E, spin, request):
    m = request.getfixturevalue(name)
    o = int(method_metrics(m, 3).order)
    ratio = applications_needed(m, spin, 1.0, E / 2).n / applications_needed(m, spin, 1.0, E).n
    assert ratio == pytest.approx(2 ** (1 / o), rel=0.15)


def test_cost_depends_only_on_metrics(third):
    # equal units swapped: same sigma, hence same metrics and cost
    units = list(third.units)
    units[1], units[2] = units[2], units[1]
    swapped = Method(tuple(units))
    p = CostParams(1e-3, 1e-6, 1.0, 1e-4)
    assert computer_time(method_metrics(swapped, 3), p) == computer_time(method_metrics(third, 3), p)
    twin = MethodMetrics(**vars(method_metrics(third, 3)))
    assert computer_time(twin, p) == computer_time(method_metrics(third, 3), p)


def test_rank_key_orders_by_Z(builtins):
    metrics = [method_metrics(m, 3) for m in builtins]
    ranked = sorted(metrics, key=rank_key)
    assert [m.order for m in ranked] == [1, 2, 3, 4]


@settings(max_examples=40)
@given(
    st.floats(0.1, 10), st.floats(0.1, 10), st.integers(1, 20), st.integers(1, 4),
    st.floats(1e-3, 1e3), st.floats(1e-8, 1e-1),
)
def test_switching_term_matches_model_count(D, R, I, o, T_p, E):
    met = MethodMetrics(D=D, L=D, I=I, order=o, R=R, G=3 * I, N=3)
    n = applications_model(met, T_p, E)
    c = computer_time(met, CostParams(t_g=1.0, b=0.0, T_p=T_p, E_target=E))
    # switching time is n applications of G gate changes each
    assert c.switching == pytest.approx(n * met.G, rel=1e-9)
