"""Splitting methods, the method-string notation, and the sigma coefficients.

A method is an ordered sequence of fundamental units.  Unit ``i`` stands for
``(exp(a_i A_1) exp(a_i A_2) ... exp(a_i A_N)) ** alpha_i``, and the whole
product is written left to right.  Collapsing the product into a single
exponential gives ``exp(sum_X sigma^X B^X)`` where the labels ``X`` run over
the thirteen commutator words listed in :data:`LABELS`.

In the text notation ``(x)`` is the forward unit with coefficient ``x`` and
``(x)^T`` applies the same exponentials in reverse term order.  Since
``(x)^T`` is the inverse of the forward unit with coefficient ``-x``, it is
stored as ``Unit(a=-x, alpha=-1)``.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from decimal import Decimal
from typing import Iterable, Mapping, Sequence

import numpy as np

__all__ = [
    "LABELS",
    "DEFAULT_ORDER_TOL",
    "Unit",
    "Method",
    "MethodSyntaxError",
    "label_order",
    "labels_of_order",
    "parse_method",
    "print_method",
    "sigma_prefix",
    "sigma_power",
    "sigma_pq",
    "sigma_ppq",
    "sigma_1112",
    "sigma_all",
    "sigma_batch",
    "order_from_sigma",
    "method_order",
    "inverse_count",
    "transpose_method",
    "inverse_method",
    "sigma_vector",
    "as_method",
]

LABELS: tuple[str, ...] = (
    "1",
    "2",
    "3", "12",
    "4", "13", "112",
    "5", "14", "23", "113", "221", "1112",
)

DEFAULT_ORDER_TOL = 1e-10

_PQ = ((1, 2), (1, 3), (1, 4), (2, 3))
_PPQ = ((1, 2), (1, 3), (2, 1))


def label_order(label: str) -> int:
    """Order of a commutator label, i.e. the sum of its digits."""
    return sum(int(c) for c in label)


def labels_of_order(order: int) -> tuple[str, ...]:
    return tuple(x for x in LABELS if label_order(x) == order)


@dataclass(frozen=True)
class Unit:
    """One fundamental factor: shared coefficient ``a`` and orientation ``alpha``."""

    a: float
    alpha: int = 1

    def __post_init__(self):
        if self.alpha not in (1, -1) or isinstance(self.alpha, bool):
            raise ValueError(f"alpha must be +1 or -1, got {self.alpha!r}")
        a = float(self.a)
        if a == 0.0 or not np.isfinite(a):
            raise ValueError(f"unit coefficient must be finite and nonzero, got {self.a!r}")
        object.__setattr__(self, "a", a)

    @property
    def step(self) -> float:
        """Signed time step ``alpha * a``; negative means backward evolution."""
        return self.alpha * self.a


@dataclass(frozen=True)
class Method:
    """An ordered product of fundamental units.

    The optional ``name`` is a display label and does not take part in
    equality.
    """

    units: tuple[Unit, ...]
    name: str | None = field(default=None, compare=False)

    def __post_init__(self):
        units = tuple(self.units)
        if not units:
            raise ValueError("a method needs at least one unit")
        if not all(isinstance(u, Unit) for u in units):
            raise TypeError("method units must be Unit instances")
        object.__setattr__(self, "units", units)

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[float, int]], name: str | None = None) -> "Method":
        return cls(tuple(Unit(a, alpha) for a, alpha in pairs), name=name)

    def __len__(self) -> int:
        return len(self.units)

    def __str__(self) -> str:
        return print_method(self)

    @property
    def coefficients(self) -> np.ndarray:
        return np.array([u.a for u in self.units], dtype=float)

    @property
    def orientations(self) -> np.ndarray:
        return np.array([u.alpha for u in self.units], dtype=float)

    def with_name(self, name: str | None) -> "Method":
        return Method(self.units, name=name)


# ---------------------------------------------------------------------------
# method strings
# ---------------------------------------------------------------------------

class MethodSyntaxError(ValueError):
    """Malformed method string.  ``pos`` is the 0-based offset of the problem."""

    def __init__(self, message: str, text: str, pos: int):
        super().__init__(f"{message} at position {pos}: {text!r}")
        self.text = text
        self.pos = pos


_TOKEN = re.compile(r"\((-?\d+(?:\.\d+)?)\)(\^T)?")
_SPACE = re.compile(r"\s*")


def parse_method(text: str, name: str | None = None) -> Method:
    """Parse the product notation, e.g. ``"(1)^T(1)(1)(1)(1)^T(-2)^T(1)(1)(1)"``.

    Raises:
        MethodSyntaxError: on a malformed token, an empty string or a zero
            coefficient.
    """
    units = []
    pos = _SPACE.match(text, 0).end()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise MethodSyntaxError("expected a token like '(x)' or '(x)^T'", text, pos)
        x = float(m.group(1))
        if x == 0.0:
            raise MethodSyntaxError("zero coefficient", text, m.start(1))
        units.append(Unit(-x, -1) if m.group(2) else Unit(x, 1))
        pos = _SPACE.match(text, m.end()).end()
    if not units:
        raise MethodSyntaxError("empty method string", text, pos)
    return Method(tuple(units), name=name)


def _format_number(x: float) -> str:
    # positional notation only: the grammar has no exponent
    if x.is_integer():
        return str(int(x))
    return format(Decimal(repr(x)), "f")


def print_method(m: Method) -> str:
    """Canonical text for ``m``; ``parse_method(print_method(m)) == m``."""
    parts = []
    for u in m.units:
        if u.alpha == 1:
            parts.append(f"({_format_number(u.a)})")
        else:
            parts.append(f"({_format_number(-u.a)})^T")
    return "".join(parts)


def transpose_method(m: Method) -> Method:
    """Transpose of the whole product: reverse the units and swap ``(x)`` with ``(x)^T``."""
    return Method(tuple(Unit(-u.a, -u.alpha) for u in reversed(m.units)))


def inverse_method(m: Method) -> Method:
    """Method whose product is the inverse of ``m``'s product."""
    return Method(tuple(Unit(u.a, -u.alpha) for u in reversed(m.units)))


# ---------------------------------------------------------------------------
# sigma coefficients
# ---------------------------------------------------------------------------

def sigma_batch(a: np.ndarray, alpha: np.ndarray, max_order: int = 5) -> dict[str, np.ndarray]:
    """All sigma coefficients for a batch of methods of equal length.

    Args:
        a: coefficients, shape ``(..., I)``.
        alpha: orientations (+1/-1), same shape as ``a``.
        max_order: highest label order to evaluate (1..5).

    Returns:
        Mapping from label to an array of shape ``a.shape[:-1]``.
    """
    a = np.asarray(a, dtype=float)
    alpha = np.asarray(alpha, dtype=float)
    zero = np.zeros(a.shape[:-1] + (1,))

    # prefix[p][..., i] = sigma_i^p for i = 0..I
    prefix = {}
    total = {}
    for p in range(1, max_order + 1):
        prefix[p] = np.concatenate([zero, np.cumsum(alpha * a**p, axis=-1)], axis=-1)
        total[p] = prefix[p][..., -1]

    def increments(p: int, k: int) -> np.ndarray:
        s = prefix[p]
        return s[..., 1:] ** k - s[..., :-1] ** k

    out = {str(p): total[p] for p in range(1, max_order + 1)}
    pq = {}
    for p, q in _PQ:
        if p + q > max_order:
            continue
        pq[p, q] = -0.5 * total[p] * total[q] + 0.5 * np.sum(a ** (q - p) * increments(p, 2), axis=-1)
        out[f"{p}{q}"] = pq[p, q]
    if (1, 2) in pq:
        pq[2, 1] = -pq[1, 2]
    for p, q in _PPQ:
        if 2 * p + q > max_order:
            continue
        out[f"{p}{p}{q}"] = (
            -0.5 * total[p] * pq[p, q]
            - total[p] ** 2 * total[q] / 6.0
            + np.sum(a ** (q - p) * increments(p, 3), axis=-1) / 6.0
        )
    if max_order >= 5:
        s1 = total[1]
        # the (sigma^1)^2 sigma^12 coefficient is -1/6; checked against a
        # truncated free Lie algebra expansion of the unit product
        out["1112"] = (
            -0.5 * s1 * out["112"]
            - s1**2 * out["12"] / 6.0
            - s1**3 * total[2] / 24.0
            + np.sum(a * increments(1, 4), axis=-1) / 24.0
        )
    return out


def _arrays(m: Method) -> tuple[np.ndarray, np.ndarray]:
    return m.coefficients, m.orientations


def sigma_prefix(m: Method, p: int) -> np.ndarray:
    """Prefix sums ``sigma_i^p`` for ``i = 0..I`` (``sigma_0^p = 0``)."""
    if p not in range(1, 6):
        raise ValueError(f"power p must be in 1..5, got {p}")
    a, alpha = _arrays(m)
    return np.concatenate([[0.0], np.cumsum(alpha * a**p)])


def sigma_power(m: Method, p: int) -> float:
    """``sigma^p = sum_i alpha_i a_i^p``."""
    return float(sigma_prefix(m, p)[-1])


def sigma_pq(m: Method, p: int, q: int) -> float:
    """Coefficient of ``[B^p, B^q]`` for ``pq`` in 12, 13, 14, 23."""
    if (p, q) not in _PQ:
        raise ValueError(f"unsupported label {p}{q}")
    s = sigma_prefix(m, p)
    a = m.coefficients
    return float(-0.5 * s[-1] * sigma_power(m, q) + 0.5 * np.sum(a ** (q - p) * (s[1:] ** 2 - s[:-1] ** 2)))


def sigma_ppq(m: Method, p: int, q: int) -> float:
    """Coefficient of ``[B^p, [B^p, B^q]]`` for ``ppq`` in 112, 113, 221."""
    if (p, q) not in _PPQ:
        raise ValueError(f"unsupported label {p}{p}{q}")
    s = sigma_prefix(m, p)
    a = m.coefficients
    spq = -sigma_pq(m, 1, 2) if (p, q) == (2, 1) else sigma_pq(m, p, q)
    return float(
        -0.5 * s[-1] * spq
        - s[-1] ** 2 * sigma_power(m, q) / 6.0
        + np.sum(a ** (q - p) * (s[1:] ** 3 - s[:-1] ** 3)) / 6.0
    )


def sigma_1112(m: Method) -> float:
    """Coefficient of ``[B^1, [B^1, [B^1, B^2]]]``."""
    s = sigma_prefix(m, 1)
    a = m.coefficients
    s1 = s[-1]
    return float(
        -0.5 * s1 * sigma_ppq(m, 1, 2)
        - s1**2 * sigma_pq(m, 1, 2) / 6.0
        - s1**3 * sigma_power(m, 2) / 24.0
        + np.sum(a * (s[1:] ** 4 - s[:-1] ** 4)) / 24.0
    )


def sigma_all(m: Method) -> dict[str, float]:
    """All thirteen sigma coefficients of ``m``, keyed by label."""
    out = {str(p): sigma_power(m, p) for p in range(1, 6)}
    for p, q in _PQ:
        out[f"{p}{q}"] = sigma_pq(m, p, q)
    for p, q in _PPQ:
        out[f"{p}{p}{q}"] = sigma_ppq(m, p, q)
    out["1112"] = sigma_1112(m)
    return {x: out[x] for x in LABELS}


def order_from_sigma(sigma: Mapping[str, float], tol: float = DEFAULT_ORDER_TOL) -> int:
    if tol <= 0:
        raise ValueError("tol must be positive")
    if not sigma["1"] > tol:
        return 0
    order = 1
    for o in range(2, 5):
        if all(abs(sigma[x]) <= tol for x in labels_of_order(o)):
            order = o
        else:
            break
    return order


def method_order(m: Method, tol: float = DEFAULT_ORDER_TOL) -> int:
    """Order of accuracy in the time step, 0 if ``sigma^1 <= tol``.

    Capped at 4: the order-5 conditions are not all available.
    """
    return order_from_sigma(sigma_all(m), tol)


def inverse_count(m: Method) -> int:
    """Number of units that evolve backward in time (``alpha * a < 0``)."""
    return sum(1 for u in m.units if u.step < 0)


def sigma_vector(m: Method) -> np.ndarray:
    return np.array([sigma_all(m)[x] for x in LABELS])


def as_method(obj: Method | str | Sequence[tuple[float, int]]) -> Method:
    if isinstance(obj, Method):
        return obj
    if isinstance(obj, str):
        return parse_method(obj)
    return Method.from_pairs(obj)
