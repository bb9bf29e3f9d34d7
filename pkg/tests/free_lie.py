"""Reference sigma coefficients from a truncated free Lie algebra.

Independent of the closed forms in ``prodform.methods``: each unit is the
exponential of ``sum_p alpha a^p b_p`` in the free associative algebra on
generators ``b_1..b_5`` (``b_p`` of weight ``p``), truncated above weight 5.
The product is multiplied out, its logarithm taken as a power series, and
the result expanded in the right-nested commutators ``B^X``.
"""
import itertools

import numpy as np

from prodform.methods import LABELS

WEIGHT = 5


def _mul(p, q):
    out = {}
    for u, x in p.items():
        for v, y in q.items():
            w = u + v
            if sum(w) <= WEIGHT:
                out[w] = out.get(w, 0.0) + x * y
    return out


def _add(p, q, scale=1.0):
    out = dict(p)
    for k, v in q.items():
        out[k] = out.get(k, 0.0) + scale * v
    return out


def _exp(x):
    out, term = {(): 1.0}, {(): 1.0}
    for k in range(1, WEIGHT + 1):
        term = {w: c / k for w, c in _mul(term, x).items()}
        out = _add(out, term)
    return out


def _log(g):
    y = _add(g, {(): 1.0}, -1.0)
    out, term = {}, {(): 1.0}
    for k in range(1, WEIGHT + 1):
        term = _mul(term, y)
        out = _add(out, term, (-1) ** (k + 1) / k)
    return out


def _bracket(p, q):
    return _add(_mul(p, q), _mul(q, p), -1.0)


def _basis_element(label):
    digits = [int(c) for c in label]
    x = {(digits[-1],): 1.0}
    for d in reversed(digits[:-1]):
        x = _bracket({(d,): 1.0}, x)
    return x


_WORDS = [
    w
    for n in range(1, WEIGHT + 1)
    for w in itertools.product(range(1, WEIGHT + 1), repeat=n)
    if sum(w) <= WEIGHT
]
_INDEX = {w: i for i, w in enumerate(_WORDS)}


def _vector(p):
    v = np.zeros(len(_WORDS))
    for w, c in p.items():
        if w:
            v[_INDEX[w]] += c
    return v


_BASIS = np.stack([_vector(_basis_element(x)) for x in LABELS], axis=1)


def reference_sigma(units):
    """Sigma coefficients for ``[(a, alpha), ...]`` keyed by label."""
    g = {(): 1.0}
    for a, alpha in units:
        g = _mul(g, _exp({(p,): alpha * a**p for p in range(1, WEIGHT + 1)}))
    target = _vector(_log(g))
    coef, *_ = np.linalg.lstsq(_BASIS, target, rcond=None)
    residual = np.linalg.norm(_BASIS @ coef - target)
    assert residual <= 1e-9 * (1 + np.linalg.norm(target)), "logarithm left the span of the basis"
    return dict(zip(LABELS, coef))
