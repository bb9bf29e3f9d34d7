"""Single-spin benchmark of the built-in methods.

The system is ``H = sigma_x + sigma_y + sigma_z`` split into its three
Pauli terms.  Each method is applied repeatedly with a fixed step and the
running product is compared against exact evolution over the same physical
time ``n D dt``.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Iterable, Sequence, TextIO

import numpy as np

from .evaluator import PAULI_X, PAULI_Y, PAULI_Z, ErrorSeries, apply_method, spin_terms
from .methods import Method, method_order, parse_method, sigma_power

__all__ = [
    "ORDER1",
    "ORDER2",
    "ORDER3",
    "ORDER4",
    "BUILTIN_STRINGS",
    "builtin_methods",
    "builtin",
    "BenchmarkSpec",
    "sample_points",
    "run_spin_benchmark",
    "presaturation",
    "loglog_slope",
    "intercepts",
    "intercept_gaps",
    "CSV_HEADER",
    "write_series_csv",
]

ORDER1 = "(1)"
ORDER2 = "(1)(1)^T"
ORDER3 = "(1)^T(1)(1)(1)(1)^T(-2)^T(1)(1)(1)"
ORDER4 = "(1)^T(1)(1)^T(-2)(1)^T(1)^T(1)^T(1)^T(1)" "(1)^T(1)(1)(1)(1)(-2)^T(1)(1)^T(1)"

BUILTIN_STRINGS = {"order1": ORDER1, "order2": ORDER2, "order3": ORDER3, "order4": ORDER4}

SATURATION = 0.1
_PAULIS = np.stack([PAULI_X, PAULI_Y, PAULI_Z])
MIN_FIT_POINTS = 5


def builtin_methods() -> list[Method]:
    """The first- to fourth-order methods, in order of increasing order."""
    return [parse_method(text, name=name) for name, text in BUILTIN_STRINGS.items()]


def builtin(name: str) -> Method:
    try:
        return parse_method(BUILTIN_STRINGS[name], name=name)
    except KeyError:
        raise KeyError(f"unknown built-in method {name!r}; choose from {sorted(BUILTIN_STRINGS)}") from None


@dataclass(frozen=True)
class BenchmarkSpec:
    """Settings for :func:`run_spin_benchmark`.

    Samples are taken at powers of two below ``stride`` and at every
    multiple of ``stride`` after that, plus the final application.
    """

    methods: tuple[Method, ...] = field(default_factory=lambda: tuple(builtin_methods()))
    dt: float = 0.01
    t_max: float = 100.0
    stride: int = 1024

    def __post_init__(self):
        object.__setattr__(self, "methods", tuple(self.methods))
        if not self.methods:
            raise ValueError("at least one method is required")
        if not self.dt > 0 or not self.t_max > 0:
            raise ValueError("dt and t_max must be positive")
        if self.stride < 1:
            raise ValueError("stride must be at least 1")


def sample_points(n_max: int, stride: int) -> np.ndarray:
    geometric = 2 ** np.arange(int(np.log2(max(stride, 1))) + 1)
    geometric = geometric[(geometric < stride) & (geometric <= n_max)]
    linear = np.arange(stride, n_max + 1, stride)
    return np.union1d(np.union1d(geometric, linear), [n_max]).astype(np.int64)


def _spin_series(m: Method, dt: float, t_max: float, stride: int) -> ErrorSeries:
    h = spin_terms()
    d = sigma_power(m, 1)
    if not d > 0:
        raise ValueError(f"method {m} does not advance time")
    n_max = max(1, int(np.ceil(t_max / (d * dt) - 1e-9)))
    step = apply_method(m, h, dt)

    # running product U_n = step^n, stacked for every n
    products = np.empty((n_max, 2, 2), dtype=complex)
    u = np.eye(2, dtype=complex)
    for k in range(n_max):
        u = u @ step
        products[k] = u

    n = np.arange(1, n_max + 1)
    w, v = np.linalg.eigh(h.total)
    phases = np.exp(-1j * np.outer(n * d * dt, w))
    exact = np.einsum("ij,tj,kj->tik", v, phases, v.conj())

    # Tr(sigma_w (U - V)) / 2 for every application at once
    delta = 0.5 * np.einsum("wij,tji->tw", _PAULIS, products - exact)
    errors = np.sqrt(np.sum(np.abs(delta) ** 2, axis=1))

    picks = sample_points(n_max, stride)
    return ErrorSeries(
        method=m.name or str(m),
        order=method_order(m),
        dt=dt,
        D=d,
        n=picks,
        error=errors[picks - 1],
        max_error=float(errors.max()),
    )


def run_spin_benchmark(spec: BenchmarkSpec | None = None) -> list[ErrorSeries]:
    """One error series per method, up to physical time ``spec.t_max``."""
    spec = spec or BenchmarkSpec()
    return [_spin_series(m, spec.dt, spec.t_max, spec.stride) for m in spec.methods]


def presaturation(series: ErrorSeries, threshold: float = SATURATION) -> np.ndarray:
    """Mask of samples with positive error below the saturation threshold."""
    return (series.error < threshold) & (series.error > 0)


def loglog_slope(series: ErrorSeries, threshold: float = SATURATION) -> float:
    """Least-squares slope of log10(error) against log10(t_phys) before saturation."""
    keep = presaturation(series, threshold)
    if keep.sum() < MIN_FIT_POINTS:
        raise ValueError(f"series {series.method!r} has fewer than {MIN_FIT_POINTS} unsaturated samples")
    slope, _ = np.polyfit(np.log10(series.t_phys[keep]), np.log10(series.error[keep]), 1)
    return float(slope)


def intercepts(series: Sequence[ErrorSeries], threshold: float = SATURATION) -> list[float]:
    """Intercept ``c`` of ``log10(error) = log10(n) + c`` for each series.

    Every series is fitted over the same application counts: those sampled
    in all series and unsaturated in all of them.
    """
    if not series:
        raise ValueError("no series given")
    common = None
    for s in series:
        ok = set(s.n[presaturation(s, threshold)].tolist())
        common = ok if common is None else common & ok
    n_fit = np.array(sorted(common), dtype=np.int64)
    if n_fit.size < MIN_FIT_POINTS:
        raise ValueError(f"only {n_fit.size} common unsaturated samples, need {MIN_FIT_POINTS}")
    out = []
    for s in series:
        idx = np.searchsorted(s.n, n_fit)
        out.append(float(np.mean(np.log10(s.error[idx]) - np.log10(n_fit))))
    return out


def intercept_gaps(series: Sequence[ErrorSeries], threshold: float = SATURATION) -> list[float]:
    """Successive intercept drops ``c_o - c_(o+1)`` between consecutive series."""
    if len(series) < 2:
        raise ValueError("need at least two series")
    c = intercepts(series, threshold)
    return [c[k] - c[k + 1] for k in range(len(c) - 1)]


CSV_HEADER = ("method", "order", "n", "t_phys", "error")


def write_series_csv(series: Iterable[ErrorSeries], out: TextIO | None = None) -> str:
    """Write samples as CSV (floats in round-trip ``repr`` form); returns the text."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for s in series:
        for n, t, e in zip(s.n.tolist(), s.t_phys.tolist(), s.error.tolist()):
            writer.writerow([s.method, s.order, n, repr(t), repr(e)])
    text = buf.getvalue()
    if out is not None:
        out.write(text)
    return text
