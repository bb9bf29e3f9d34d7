"""Dense matrix kernels: unitary exponentials, nested commutators and a
fifth-order Campbell-Baker-Hausdorff exponent.

Everything here works on small dense complex matrices (``2 <= d <= 16``).
Exponentials are restricted to Hermitian generators and computed from the
spectral decomposition, so results are unitary to rounding.
:func:`method_exponent_oracle` recovers low-order sigma coefficients of a
method numerically, independently of the closed forms in
:mod:`prodform.methods`.
"""
from __future__ import annotations

from typing import Sequence

import numpy as np
import scipy.linalg

from .methods import Method

__all__ = [
    "HermitianError",
    "frobenius",
    "is_hermitian",
    "is_unitary",
    "unitary_exp",
    "antihermitian_exp",
    "unitary_log",
    "unitary_power",
    "commutator",
    "nested_commutator",
    "cbh_exponent_5",
    "cbh_unit_terms",
    "random_antihermitian",
    "method_product_2",
    "method_exponent_oracle",
]

MAX_DIM = 16


class HermitianError(ValueError):
    """Input matrix lacks the required (anti-)Hermitian symmetry."""


def frobenius(x: np.ndarray) -> float:
    return float(np.linalg.norm(x, "fro"))


def _square(x, what="matrix") -> np.ndarray:
    x = np.asarray(x, dtype=complex)
    if x.ndim != 2 or x.shape[0] != x.shape[1]:
        raise ValueError(f"{what} must be square, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise ValueError(f"{what} has non-finite entries")
    return x


def is_hermitian(h: np.ndarray, rtol: float = 1e-12) -> bool:
    return frobenius(h - h.conj().T) <= rtol * max(frobenius(h), 1.0)


def is_unitary(u: np.ndarray, tol: float | None = None) -> bool:
    """``||U^dagger U - I||_F <= tol`` (default ``1e-12 * d``)."""
    d = u.shape[0]
    if tol is None:
        tol = 1e-12 * d
    return frobenius(u.conj().T @ u - np.eye(d)) <= tol


def unitary_exp(h: np.ndarray, t: float) -> np.ndarray:
    """``exp(-i H t)`` for Hermitian ``H``, by spectral decomposition.

    Raises:
        HermitianError: if ``H`` is not Hermitian to relative precision 1e-12.
    """
    h = _square(h, "Hamiltonian")
    if not is_hermitian(h):
        raise HermitianError("unitary_exp needs a Hermitian generator")
    w, v = np.linalg.eigh(0.5 * (h + h.conj().T))
    return (v * np.exp(-1j * w * t)) @ v.conj().T


def antihermitian_exp(a: np.ndarray, s: float = 1.0) -> np.ndarray:
    """``exp(s A)`` for anti-Hermitian ``A`` (``A = -i H``)."""
    return unitary_exp(1j * np.asarray(a, dtype=complex), s)


def unitary_log(u: np.ndarray) -> np.ndarray:
    """Principal logarithm of a unitary: eigenphases taken in (-pi, pi]."""
    u = _square(u, "unitary")
    t, z = scipy.linalg.schur(u, output="complex")
    phases = np.angle(np.diag(t))
    return (z * (1j * phases)) @ z.conj().T


def unitary_power(u: np.ndarray, n: int) -> np.ndarray:
    """``U**n`` for unitary ``U`` from its eigenphases.

    Unlike repeated squaring, the result stays unitary to rounding for any
    ``n`` because every eigenvalue is kept on the unit circle.
    """
    u = _square(u, "unitary")
    t, z = scipy.linalg.schur(u, output="complex")
    phases = np.angle(np.diag(t))
    return (z * np.exp(1j * n * phases)) @ z.conj().T


def commutator(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    return x @ y - y @ x


def nested_commutator(indices: str | Sequence[int], mats: Sequence[np.ndarray]) -> np.ndarray:
    """Right-nested commutator ``[A_k, [A_l, ... [A_m, A_n] ...]]``.

    ``indices`` are 1-based positions into ``mats``, given either as a digit
    string (``"112"``) or a sequence of ints.
    """
    idx = [int(c) for c in indices]
    if len(idx) < 2:
        raise ValueError("a nested commutator needs at least two indices")
    for k in idx:
        if not 1 <= k <= len(mats):
            raise IndexError(f"commutator index {k} out of range for {len(mats)} matrices")
    out = np.asarray(mats[idx[-1] - 1], dtype=complex)
    for k in reversed(idx[:-1]):
        out = commutator(np.asarray(mats[k - 1], dtype=complex), out)
    return out


def _check_antihermitian(a: np.ndarray, what: str) -> np.ndarray:
    a = _square(a, what)
    if frobenius(a + a.conj().T) > 1e-12 * max(frobenius(a), 1.0):
        raise HermitianError(f"{what} must be anti-Hermitian")
    return a


def cbh_unit_terms(a1: np.ndarray, a2: np.ndarray) -> list[np.ndarray]:
    """Homogeneous pieces of ``log(exp(a A1) exp(a A2))`` for powers ``a^1..a^5``."""
    a1 = _check_antihermitian(a1, "A1")
    a2 = _check_antihermitian(a2, "A2")
    m = (a1, a2)

    def c(word):
        return nested_commutator(word, m)

    return [
        a1 + a2,
        0.5 * c("12"),
        (c("112") + c("221")) / 12.0,
        c("1221") / 24.0,
        -(c("11112") - 2 * c("21112") - 6 * c("11221") - 6 * c("22112") - 2 * c("12221") + c("22221")) / 720.0,
    ]


def cbh_exponent_5(a1: np.ndarray, a2: np.ndarray, a: float = 1.0) -> np.ndarray:
    """Fifth-order truncation of ``log(exp(a A1) exp(a A2))``."""
    return sum(a ** (k + 1) * term for k, term in enumerate(cbh_unit_terms(a1, a2)))


def random_antihermitian(d: int, rng: np.random.Generator, normalize: bool = False) -> np.ndarray:
    """``(M - M^dagger)/2`` with standard normal real and imaginary parts."""
    if not 2 <= d <= MAX_DIM:
        raise ValueError(f"dimension must be in 2..{MAX_DIM}")
    m = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    a = 0.5 * (m - m.conj().T)
    if normalize:
        a = a / frobenius(a)
    return a


def method_product_2(m: Method, a1: np.ndarray, a2: np.ndarray, h: float = 1.0) -> np.ndarray:
    """Product of ``m``'s units for two anti-Hermitian terms scaled by ``h``."""
    d = a1.shape[0]
    out = np.eye(d, dtype=complex)
    for u in m.units:
        first = antihermitian_exp(a1, h * u.a)
        second = antihermitian_exp(a2, h * u.a)
        block = first @ second if u.alpha == 1 else second.conj().T @ first.conj().T
        out = out @ block
    return out


def _project(target: np.ndarray, basis: Sequence[np.ndarray]) -> np.ndarray:
    mat = np.stack([b.ravel() for b in basis], axis=1)
    if np.linalg.cond(mat) > 1e8:
        raise np.linalg.LinAlgError("basis matrices are numerically dependent")
    coef, *_ = np.linalg.lstsq(mat, target.ravel(), rcond=None)
    return coef.real


def method_exponent_oracle(
    m: Method,
    mats: Sequence[np.ndarray] | None = None,
    a_scale: float = 0.1,
    *,
    levels: int = 6,
    degree: int = 9,
    seed: int = 0,
    max_draws: int = 5,
) -> dict[str, float]:
    """Numerical estimates of ``sigma^1, sigma^2, sigma^3, sigma^12``.

    The method product is formed for two anti-Hermitian terms at scales
    ``h = +-a_scale * 2**-k``.  Its logarithm is fitted as a polynomial in
    ``h`` of the given degree, and the ``h``, ``h^2`` and ``h^3``
    coefficients are projected onto ``B^1``, ``B^2`` and ``{B^3, [B^1, B^2]}``
    built from the CBH pieces of a single forward unit.

    Args:
        m: method to evaluate.
        mats: two anti-Hermitian matrices; drawn at random (4x4) when omitted.
        a_scale: largest scale used in the fit.
        levels: number of scales on each side of zero.
        degree: degree of the fitted polynomial.
        seed: seed for random draws.
        max_draws: retries when the projection basis is degenerate.
    """
    if a_scale <= 0:
        raise ValueError("a_scale must be positive")
    rng = np.random.default_rng(seed)
    draws = max_draws if mats is None else 1
    for attempt in range(draws):
        if mats is None:
            a1, a2 = random_antihermitian(4, rng, True), random_antihermitian(4, rng, True)
        else:
            if len(mats) != 2:
                raise ValueError("the oracle works with exactly two terms")
            a1, a2 = (np.asarray(x, dtype=complex) for x in mats)
        b = cbh_unit_terms(a1, a2)
        b12 = commutator(b[0], b[1])
        hs = a_scale * 2.0 ** -np.arange(levels)
        hs = np.concatenate([hs, -hs])
        logs = np.stack([unitary_log(method_product_2(m, a1, a2, h)).ravel() for h in hs])
        # log U(h) = h C1 + h^2 C2 + h^3 C3 + ...; +-h nodes keep the fit well conditioned
        vander = np.vander(hs, degree + 1, increasing=True)[:, 1:]
        coef, *_ = np.linalg.lstsq(vander, logs, rcond=None)
        shape = a1.shape
        c1, c2, c3 = (coef[k].reshape(shape) for k in range(3))
        try:
            s1 = _project(c1, [b[0]])[0]
            s2 = _project(c2, [b[1]])[0]
            s3, s12 = _project(c3, [b[2], b12])
        except np.linalg.LinAlgError:
            if attempt + 1 < draws:
                continue
            raise
        return {"1": s1, "2": s2, "3": s3, "12": s12}
    raise RuntimeError("unreachable")
