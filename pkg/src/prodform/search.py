"""Staged search for methods that satisfy the order conditions.

Methods with ``I`` units and coefficient magnitudes from a finite grid are
filtered in three stages, cheapest first:

1. ``stage_signs``: unordered multisets of signed steps ``s = alpha * a``.
   The power sums for ``p = 1`` and ``p = 3`` depend only on ``s``, so they
   are checked here (``sum s > 0``, ``sum s**3 = 0``).
2. ``stage_split_signs``: each ``s`` is realized as ``(alpha, a)`` in its two
   possible ways and the even power sums (``p = 2`` and, for fourth order,
   ``p = 4``) are checked.  Order still does not matter.
3. ``stage_ordered``: distinct orderings of each realization, checked
   against every sigma coefficient up to the target order.

Each stage is a pure filter, so anything reported by stage 3 also passes
stages 1 and 2.
"""
from __future__ import annotations

import itertools
import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

from .cost import MethodMetrics, method_metrics, rank_key
from .methods import LABELS, Method, Unit, label_order, print_method, sigma_batch, transpose_method

__all__ = [
    "StageLimits",
    "SearchConfig",
    "SearchResult",
    "SearchLimitError",
    "InverseBound",
    "stage_signs",
    "stage_split_signs",
    "stage_ordered",
    "search",
    "min_inverses",
    "distinct_permutations",
]

CHUNK = 1 << 17


class SearchLimitError(RuntimeError):
    """A stage would enumerate more candidates than its configured cap."""


@dataclass(frozen=True)
class StageLimits:
    multisets: int = 2_000_000
    realizations: int = 2_000_000
    permutations: int = 50_000_000


@dataclass(frozen=True)
class SearchConfig:
    """Search grid and tolerances.

    Attributes:
        I: number of units.
        candidates: allowed magnitudes ``|a_i|`` (nonzero).
        target_order: order the results must reach (1..4).
        tol: absolute tolerance on every vanishing sigma coefficient.
        max_results: keep only the best-ranked results (``None`` keeps all).
        n_terms: Hamiltonian terms ``N`` assumed when ranking by ``Z``.
        max_inverses: if set, only consider methods with at most this many
            backward steps.
        limits: per-stage enumeration caps.
    """

    I: int
    candidates: tuple[float, ...] = (1.0, 2.0, 3.0)
    target_order: int = 3
    tol: float = 1e-9
    max_results: int | None = None
    n_terms: int = 2
    max_inverses: int | None = None
    limits: StageLimits = field(default_factory=StageLimits)

    def __post_init__(self):
        cands = tuple(sorted({abs(float(c)) for c in self.candidates}))
        object.__setattr__(self, "candidates", cands)
        if self.I < 1:
            raise ValueError("I must be at least 1")
        if not cands or 0.0 in cands:
            raise ValueError("candidates must be a nonempty set of nonzero magnitudes")
        if self.target_order not in (1, 2, 3, 4):
            raise ValueError("target_order must be 1, 2, 3 or 4")
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.max_results is not None and self.max_results < 1:
            raise ValueError("max_results must be positive")
        if self.n_terms < 1:
            raise ValueError("n_terms must be at least 1")


@dataclass(frozen=True)
class SearchResult:
    """A method that meets the target order.

    ``transpose`` is ``"self"`` when the method equals its own transpose,
    ``"pair"`` when its transpose is another result, and ``""`` otherwise.
    """

    method: Method
    sigma: dict[str, float]
    metrics: MethodMetrics
    transpose: str = ""


@dataclass(frozen=True)
class InverseBound:
    """Smallest inverse count found, with the size of the space checked per level.

    ``checked[k]`` holds ``(multisets, realizations, orderings)`` examined
    with exactly ``k`` inverses; every level below ``minimum`` was searched
    exhaustively without a solution.
    """

    minimum: int | None
    witness: Method | None
    checked: dict[int, tuple[int, int, int]]


def _signed_values(cfg: SearchConfig) -> list[float]:
    return sorted([-c for c in cfg.candidates] + list(cfg.candidates))


def _sign_multisets(cfg: SearchConfig, inverses: int | None) -> list[tuple[float, ...]]:
    values = _signed_values(cfg)
    total = math.comb(len(values) + cfg.I - 1, cfg.I)
    if total > cfg.limits.multisets:
        raise SearchLimitError(f"stage 1 would enumerate {total} multisets (cap {cfg.limits.multisets})")
    out = []
    for combo in itertools.combinations_with_replacement(values, cfg.I):
        neg = sum(1 for s in combo if s < 0)
        if inverses is not None and neg != inverses:
            continue
        if cfg.max_inverses is not None and neg > cfg.max_inverses:
            continue
        if not sum(combo) > cfg.tol:
            continue
        if cfg.target_order >= 3 and abs(sum(s**3 for s in combo)) > cfg.tol:
            continue
        out.append(combo)
    return out


def stage_signs(cfg: SearchConfig) -> list[tuple[float, ...]]:
    """Stage 1: sorted multisets of signed steps passing the ``p = 1, 3`` sums."""
    return _sign_multisets(cfg, None)


def _realizations(multiset: Sequence[float]) -> Iterator[tuple[tuple[float, int, int], ...]]:
    # per distinct step s: j units as (a=-s, alpha=-1), the rest as (a=s, alpha=+1)
    groups = sorted(Counter(multiset).items())
    for split in itertools.product(*(range(k + 1) for _, k in groups)):
        yield tuple((s, k, j) for (s, k), j in zip(groups, split))


def stage_split_signs(multisets: Sequence[Sequence[float]], cfg: SearchConfig) -> list[tuple[Unit, ...]]:
    """Stage 2: realizations ``(alpha, a)`` passing the ``p = 2`` (and ``p = 4``) sums."""
    total = sum(math.prod(k + 1 for k in Counter(ms).values()) for ms in multisets)
    if total > cfg.limits.realizations:
        raise SearchLimitError(f"stage 2 would enumerate {total} realizations (cap {cfg.limits.realizations})")
    out = []
    for ms in multisets:
        for groups in _realizations(ms):
            # alpha a^p = alpha s^p for even p
            if cfg.target_order >= 2 and abs(sum((k - 2 * j) * s**2 for s, k, j in groups)) > cfg.tol:
                continue
            if cfg.target_order >= 4 and abs(sum((k - 2 * j) * s**4 for s, k, j in groups)) > cfg.tol:
                continue
            units = []
            for s, k, j in groups:
                units += [Unit(-s, -1)] * j + [Unit(s, 1)] * (k - j)
            out.append(tuple(sorted(units, key=lambda u: (u.a, u.alpha))))
    return out


def distinct_permutations(counts: Sequence[int], chunk: int = CHUNK) -> Iterator[np.ndarray]:
    """Every distinct arrangement of a multiset, as rows of type indices.

    Type ``t`` occurs ``counts[t]`` times in each row.  Rows come in blocks
    of roughly ``chunk`` and each arrangement appears exactly once.
    """
    counts = [int(c) for c in counts]
    size = sum(counts)
    order = sorted(range(len(counts)), key=lambda t: -counts[t])
    order = [t for t in order if counts[t] > 0]
    if not order:
        return
    head, rest = order[0], order[1:]
    head_combos = np.array(list(itertools.combinations(range(size), counts[head])), dtype=np.intp)
    per_head = math.factorial(size - counts[head])
    for t in rest:
        per_head //= math.factorial(counts[t])
    block = max(1, chunk // max(per_head, 1))
    for start in range(0, len(head_combos), block):
        combos = head_combos[start:start + block]
        rows = np.full((len(combos), size), -1, dtype=np.int8)
        np.put_along_axis(rows, combos, head, axis=1)
        for t in rest:
            free = np.argsort(rows != -1, axis=1, kind="stable")[:, : size - int((rows[0] != -1).sum())]
            picks = np.array(list(itertools.combinations(range(free.shape[1]), counts[t])), dtype=np.intp)
            rows = np.repeat(rows, len(picks), axis=0)
            chosen = free[:, picks].reshape(-1, counts[t])
            np.put_along_axis(rows, chosen, t, axis=1)
        yield rows


def _multinomial(counts: Sequence[int]) -> int:
    out = math.factorial(sum(counts))
    for c in counts:
        out //= math.factorial(c)
    return out


def _passing_orderings(units: Sequence[Unit], cfg: SearchConfig, first_only: bool = False) -> Iterator[Method]:
    kinds = sorted(Counter(units).items(), key=lambda kv: (kv[0].a, kv[0].alpha))
    a_of = np.array([u.a for u, _ in kinds])
    alpha_of = np.array([u.alpha for u, _ in kinds], dtype=float)
    counts = [c for _, c in kinds]
    checks = [x for x in LABELS if 2 <= label_order(x) <= cfg.target_order]
    for rows in distinct_permutations(counts):
        sig = sigma_batch(a_of[rows], alpha_of[rows], max_order=max(cfg.target_order, 1))
        ok = sig["1"] > cfg.tol
        for x in checks:
            ok &= np.abs(sig[x]) <= cfg.tol
        for r in np.nonzero(ok)[0]:
            yield Method(tuple(kinds[t][0] for t in rows[r]))
            if first_only:
                return


def _ordering_count(realizations: Sequence[Sequence[Unit]]) -> int:
    return sum(_multinomial(list(Counter(r).values())) for r in realizations)


def stage_ordered(realizations: Sequence[Sequence[Unit]], cfg: SearchConfig) -> list[SearchResult]:
    """Stage 3: orderings meeting every order condition up to ``cfg.target_order``.

    Results are ranked by ``Z``, then ``L/D``, then ``I``, with the method
    string as the final tie-break.
    """
    total = _ordering_count(realizations)
    if total > cfg.limits.permutations:
        raise SearchLimitError(f"stage 3 would enumerate {total} orderings (cap {cfg.limits.permutations})")
    found = {}
    for units in realizations:
        for m in _passing_orderings(units, cfg):
            found.setdefault(m, None)
    results = []
    for m in found:
        metrics = method_metrics(m, cfg.n_terms, tol=cfg.tol)
        t = transpose_method(m)
        flag = "self" if t == m else ("pair" if t in found else "")
        sig = {k: float(v[()]) for k, v in sigma_batch(m.coefficients, m.orientations).items()}
        results.append(SearchResult(m, sig, metrics, flag))
    results.sort(key=lambda r: (rank_key(r.metrics), print_method(r.method)))
    if cfg.max_results is not None:
        results = results[: cfg.max_results]
    return results


def search(cfg: SearchConfig) -> list[SearchResult]:
    """Run all three stages."""
    ms = stage_signs(cfg)
    if not ms:
        return []
    return stage_ordered(stage_split_signs(ms, cfg), cfg)


def min_inverses(target_order: int, cfg: SearchConfig, sizes: Sequence[int] | None = None) -> InverseBound:
    """Fewest backward steps any method of ``target_order`` needs on the grid.

    Inverse counts are tried in increasing order over every ``I`` in
    ``sizes`` (default ``1..cfg.I``); the first count with a solution is
    returned together with a witness.  Returns ``minimum=None`` when no
    count up to the largest size has a solution.
    """
    sizes = list(sizes) if sizes is not None else list(range(1, cfg.I + 1))
    checked = {}
    for k in range(max(sizes) + 1):
        n_ms = n_real = n_perm = 0
        for size in sizes:
            if k > size:
                continue
            sub = SearchConfig(
                I=size,
                candidates=cfg.candidates,
                target_order=target_order,
                tol=cfg.tol,
                n_terms=cfg.n_terms,
                limits=cfg.limits,
            )
            ms = _sign_multisets(sub, k)
            reals = stage_split_signs(ms, sub)
            n_ms += len(ms)
            n_real += len(reals)
            count = _ordering_count(reals)
            if count > cfg.limits.permutations:
                raise SearchLimitError(f"stage 3 would enumerate {count} orderings (cap {cfg.limits.permutations})")
            for units in reals:
                n_perm += _multinomial(list(Counter(units).values()))
                witness = next(_passing_orderings(units, sub, first_only=True), None)
                if witness is not None:
                    checked[k] = (n_ms, n_real, n_perm)
                    return InverseBound(k, witness, checked)
        checked[k] = (n_ms, n_real, n_perm)
    return InverseBound(None, None, checked)
