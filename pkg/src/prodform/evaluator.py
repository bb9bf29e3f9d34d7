"""Apply splitting methods to concrete Hamiltonians and measure their error."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .lie import HermitianError, frobenius, is_hermitian, unitary_exp, unitary_power
from .methods import Method, Unit, sigma_power

__all__ = [
    "PAULI_X",
    "PAULI_Y",
    "PAULI_Z",
    "HamiltonianTerms",
    "ErrorSeries",
    "spin_terms",
    "apply_unit",
    "apply_method",
    "exact_evolution",
    "pauli_components",
    "pauli_error",
    "operator_error",
    "method_error",
    "measure_order",
]

PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)

UNDERFLOW = 1e-14


@dataclass(frozen=True)
class HamiltonianTerms:
    """Ordered Hermitian terms ``H_1 .. H_N`` of common dimension."""

    terms: tuple[np.ndarray, ...]

    def __post_init__(self):
        terms = tuple(np.array(t, dtype=complex) for t in self.terms)
        if not terms:
            raise ValueError("need at least one Hamiltonian term")
        d = terms[0].shape
        for k, t in enumerate(terms, 1):
            if t.ndim != 2 or t.shape != d or d[0] != d[1]:
                raise ValueError(f"term {k} has shape {t.shape}, expected square {d}")
            if not is_hermitian(t):
                raise HermitianError(f"term {k} is not Hermitian")
            t.setflags(write=False)
        object.__setattr__(self, "terms", terms)

    def __len__(self) -> int:
        return len(self.terms)

    @property
    def dim(self) -> int:
        return self.terms[0].shape[0]

    @property
    def total(self) -> np.ndarray:
        return sum(self.terms)


def spin_terms() -> HamiltonianTerms:
    """The single-spin system ``sigma_x + sigma_y + sigma_z`` split into its three terms."""
    return HamiltonianTerms((PAULI_X, PAULI_Y, PAULI_Z))


def apply_unit(u: Unit, h: HamiltonianTerms, dt: float) -> np.ndarray:
    """Matrix of one fundamental unit with time step ``dt``.

    A forward unit is ``exp(-i H_1 a dt) ... exp(-i H_N a dt)``; a unit with
    ``alpha = -1`` is its inverse, ``exp(+i H_N a dt) ... exp(+i H_1 a dt)``.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    out = np.eye(h.dim, dtype=complex)
    if u.alpha == 1:
        for term in h.terms:
            out = out @ unitary_exp(term, u.a * dt)
    else:
        for term in reversed(h.terms):
            out = out @ unitary_exp(term, -u.a * dt)
    return out


def apply_method(m: Method, h: HamiltonianTerms, dt: float, n: int = 1) -> np.ndarray:
    """The method's product of units, applied ``n`` times."""
    if n < 1:
        raise ValueError("n must be at least 1")
    step = np.eye(h.dim, dtype=complex)
    for u in m.units:
        step = step @ apply_unit(u, h, dt)
    return step if n == 1 else unitary_power(step, n)


def exact_evolution(h: HamiltonianTerms, t: float) -> np.ndarray:
    return unitary_exp(h.total, t)


def pauli_components(u: np.ndarray) -> np.ndarray:
    """Complex components ``c_w = Tr(sigma_w U) / 2`` for ``w = x, y, z``."""
    u = np.asarray(u)
    if u.shape != (2, 2):
        raise ValueError(f"Pauli components need a 2x2 matrix, got {u.shape}")
    return np.array([0.5 * np.trace(p @ u) for p in (PAULI_X, PAULI_Y, PAULI_Z)])


def pauli_error(u_approx: np.ndarray, u_exact: np.ndarray) -> float:
    """Euclidean distance between the sigma_x, sigma_y, sigma_z components.

    The identity component does not enter.
    """
    delta = np.abs(pauli_components(u_approx) - pauli_components(u_exact))
    return float(np.sqrt(np.sum(delta**2)))


def operator_error(u_approx: np.ndarray, u_exact: np.ndarray) -> float:
    """Frobenius distance ``||U_approx - U_exact||_F``."""
    if np.shape(u_approx) != np.shape(u_exact):
        raise ValueError(f"dimension mismatch: {np.shape(u_approx)} vs {np.shape(u_exact)}")
    return frobenius(np.asarray(u_approx) - np.asarray(u_exact))


def method_error(m: Method, h: HamiltonianTerms, dt: float, n: int = 1) -> float:
    """Error of ``n`` applications against exact evolution over the physical time ``n D dt``.

    Uses :func:`pauli_error` for a single spin and :func:`operator_error` otherwise.
    """
    approx = apply_method(m, h, dt, n)
    exact = exact_evolution(h, n * sigma_power(m, 1) * dt)
    if h.dim == 2:
        return pauli_error(approx, exact)
    return operator_error(approx, exact)


def measure_order(m: Method, h: HamiltonianTerms, dt_grid: Sequence[float]) -> float:
    """Fitted slope of log(one-step error) against log(dt); about ``order + 1``.

    Points whose error underflows below 1e-14 are dropped.

    Raises:
        ValueError: if the grid has fewer than 4 decreasing values or fewer
            than 3 points survive.
    """
    dts = np.asarray(dt_grid, dtype=float)
    if dts.size < 4 or np.any(np.diff(dts) >= 0) or np.any(dts <= 0):
        raise ValueError("dt_grid needs at least 4 positive, strictly decreasing values")
    d = sigma_power(m, 1)
    errs = np.array(
        [operator_error(apply_method(m, h, dt), exact_evolution(h, d * dt)) for dt in dts]
    )
    keep = errs > UNDERFLOW
    if keep.sum() < 3:
        raise ValueError("fewer than 3 grid points with measurable error")
    slope, _ = np.polyfit(np.log(dts[keep]), np.log(errs[keep]), 1)
    return float(slope)


@dataclass(frozen=True)
class ErrorSeries:
    """Error samples of a benchmark run.

    ``t_phys`` is ``n * D * dt``.  ``max_error`` is the largest error over
    every application in the run, not only the sampled ones.
    """

    method: str
    order: int
    dt: float
    D: float
    n: np.ndarray
    error: np.ndarray
    max_error: float = field(default=float("nan"))

    def __post_init__(self):
        n = np.asarray(self.n, dtype=np.int64)
        err = np.asarray(self.error, dtype=float)
        if n.shape != err.shape or n.ndim != 1:
            raise ValueError("n and error must be 1-d arrays of equal length")
        if np.any(np.diff(n) <= 0):
            raise ValueError("n must be strictly increasing")
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "error", err)
        if np.isnan(self.max_error):
            object.__setattr__(self, "max_error", float(err.max()) if err.size else 0.0)

    @property
    def t_phys(self) -> np.ndarray:
        return self.n * self.D * self.dt

    def __len__(self) -> int:
        return len(self.n)
