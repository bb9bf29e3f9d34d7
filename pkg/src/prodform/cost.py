"""Method metrics and the gate-time cost model.

For a method of order ``o`` applied ``n`` times with step ``dt`` the error is
modelled as ``E = n R dt**(o+1)`` and the simulated physical time is
``T_p = n D dt``.  Eliminating ``n`` and ``dt`` gives the computer time

    T_c = (T_p**(o+1) / E)**(1/o) * (G/D) * (R/D)**(1/o) * t_g + L b T_p / D

where ``G = I N`` exponential factors (gate changes) make up one application.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .evaluator import HamiltonianTerms, method_error
from .methods import (
    DEFAULT_ORDER_TOL,
    Method,
    inverse_count,
    labels_of_order,
    order_from_sigma,
    sigma_all,
)

__all__ = [
    "MethodMetrics",
    "CostParams",
    "CostBreakdown",
    "ApplicationCount",
    "error_scalar_R",
    "method_metrics",
    "gate_factor_Z",
    "computer_time",
    "applications_model",
    "applications_needed",
    "rank_key",
]


@dataclass(frozen=True)
class MethodMetrics:
    D: float
    L: float
    I: int
    order: int
    R: float
    G: float
    N: int = 1
    inverses: int = 0

    def __post_init__(self):
        if self.L < abs(self.D) - 1e-12:
            raise ValueError("L must be at least |D|")
        if self.R < 0:
            raise ValueError("R must be non-negative")

    @property
    def Z(self) -> float:
        return gate_factor_Z(self)


@dataclass(frozen=True)
class CostParams:
    """Hardware and target parameters.

    Attributes:
        t_g: time for one gate change, seconds.
        b: gate application time per unit time step (``t_s = b dt``).
        T_p: physical time to simulate.
        E_target: total error budget.
    """

    t_g: float
    b: float
    T_p: float
    E_target: float

    def __post_init__(self):
        # t_g = 0 or b = 0 isolate one of the two cost terms
        for name in ("t_g", "b"):
            if not getattr(self, name) >= 0:
                raise ValueError(f"{name} must be non-negative")
        for name in ("T_p", "E_target"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be strictly positive")


class CostBreakdown(NamedTuple):
    total: float
    switching: float
    application: float


class ApplicationCount(NamedTuple):
    n: int
    error: float


def _residual_norm(sigma: dict[str, float], order: int) -> float:
    return math.sqrt(sum(sigma[x] ** 2 for x in labels_of_order(order + 1)))


def error_scalar_R(m: Method, tol: float = DEFAULT_ORDER_TOL) -> float:
    """Euclidean norm of the leading (order ``o + 1``) sigma coefficients."""
    sigma = sigma_all(m)
    order = order_from_sigma(sigma, tol)
    if order == 0:
        raise ValueError("R is undefined for a method of order 0")
    return _residual_norm(sigma, order)


def method_metrics(m: Method, n_terms: int, tol: float = DEFAULT_ORDER_TOL) -> MethodMetrics:
    if n_terms < 1:
        raise ValueError("n_terms must be at least 1")
    sigma = sigma_all(m)
    order = order_from_sigma(sigma, tol)
    return MethodMetrics(
        D=sigma["1"],
        L=float(np.sum(np.abs(m.coefficients))),
        I=len(m),
        order=order,
        R=_residual_norm(sigma, order) if order else float("nan"),
        G=float(len(m) * n_terms),
        N=n_terms,
        inverses=inverse_count(m),
    )


def gate_factor_Z(metrics: MethodMetrics) -> float:
    """``Z = (G/D) (R/D)**(1/o)``; small is good when gate switching dominates."""
    if not metrics.D > 0 or metrics.order < 1:
        raise ValueError("Z needs D > 0 and order >= 1")
    return (metrics.G / metrics.D) * (metrics.R / metrics.D) ** (1.0 / metrics.order)


def computer_time(metrics: MethodMetrics, params: CostParams) -> CostBreakdown:
    """Total computer time and its gate-switching and gate-application parts."""
    o = metrics.order
    switching = (params.T_p ** (o + 1) / params.E_target) ** (1.0 / o) * gate_factor_Z(metrics) * params.t_g
    application = metrics.L * params.b * params.T_p / metrics.D
    return CostBreakdown(switching + application, switching, application)


def applications_model(metrics: MethodMetrics, T_p: float, E_target: float) -> float:
    """Applications predicted by ``E = n R dt**(o+1)`` with ``T_p = n D dt`` (not rounded)."""
    o = metrics.order
    return (T_p ** (o + 1) * metrics.R / (E_target * metrics.D ** (o + 1))) ** (1.0 / o)


def applications_needed(
    m: Method,
    h: HamiltonianTerms,
    T_p: float,
    E_target: float,
    ceiling: int = 10**6,
) -> ApplicationCount:
    """Smallest ``n`` whose measured error over ``T_p`` is within ``E_target``.

    The step is ``dt = T_p / (n D)``.  The error is searched by doubling and
    then bisection, which assumes it decreases with ``n``.

    Raises:
        RuntimeError: if more than ``ceiling`` applications would be needed.
    """
    if not (T_p > 0 and E_target > 0):
        raise ValueError("T_p and E_target must be positive")
    d = sum(u.step for u in m.units)
    if not d > 0:
        raise ValueError("method does not advance time (D <= 0)")

    def err(n: int) -> float:
        return method_error(m, h, T_p / (n * d), n)

    hi = 1
    e_hi = err(hi)
    while e_hi > E_target:
        if hi >= ceiling:
            raise RuntimeError(f"error {e_hi:.3g} still above {E_target:g} at n = {hi}")
        hi = min(2 * hi, ceiling)
        e_hi = err(hi)
    lo = hi // 2  # fails, or 0 when n = 1 already passes
    while hi - lo > 1:
        mid = (lo + hi) // 2
        e_mid = err(mid)
        if e_mid <= E_target:
            hi, e_hi = mid, e_mid
        else:
            lo = mid
    return ApplicationCount(hi, e_hi)


def rank_key(metrics: MethodMetrics) -> tuple[float, float, int]:
    """Sort key: ``Z`` ascending, then ``L/D``, then ``I``."""
    return (metrics.Z, metrics.L / metrics.D, metrics.I)
