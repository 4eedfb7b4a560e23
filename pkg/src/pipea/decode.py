"""Turn a similarity matrix into one-to-one alignments and score them.

The exact Hungarian solver is kept as a small-scale oracle; the scalable
route is Sinkhorn normalization followed by greedy one-to-one extraction.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import ParameterError
from .kg import SeedAlignments
from .validation import as_dense

HUNGARIAN_MAX_SIZE = 2000


@dataclass(frozen=True)
class AlignmentResult:
    """One-to-one predicted pairs in the order they were decided."""

    predicted_pairs: tuple[tuple[int, int], ...]
    method: str  # greedy | sinkhorn_greedy | hungarian

    def __post_init__(self):
        srcs = [s for s, _ in self.predicted_pairs]
        tgts = [t for _, t in self.predicted_pairs]
        if len(set(srcs)) != len(srcs) or len(set(tgts)) != len(tgts):
            raise ParameterError("predicted pairs are not one-to-one")


@dataclass(frozen=True)
class EvalReport:
    """Ranking metrics over the held-out test pairs."""

    hits_at: dict
    mrr: float
    num_test: int
    config_echo: dict = field(default_factory=dict)

    def to_json_dict(self) -> dict:
        return {
            "hits": {str(k): v for k, v in self.hits_at.items()},
            "mrr": self.mrr,
            "num_test": self.num_test,
            "config": dict(self.config_echo),
        }


def sinkhorn(omega: np.ndarray, q: int) -> np.ndarray:
    """q rounds of row-then-column normalization of the exponentiated scores.

    Each row's max is subtracted before exponentiation; the shift is absorbed
    by the first row normalization, so only overflow behavior changes.
    """
    omega = as_dense(omega, "sinkhorn input")
    if omega.shape[0] != omega.shape[1]:
        raise ParameterError(
            f"sinkhorn needs a square matrix, got {omega.shape}; pad first"
        )
    if q < 1:
        raise ParameterError(f"q={q} must be >= 1")
    s = np.exp(omega - omega.max(axis=1, keepdims=True))
    for _ in range(q):
        s = s / s.sum(axis=1, keepdims=True)
        s = s / s.sum(axis=0, keepdims=True)
    return s


def pad_to_square(omega: np.ndarray) -> np.ndarray:
    """Pad a rectangular matrix with min-1 so padded cells can never win."""
    n, m = omega.shape
    if n == m:
        return omega
    size = max(n, m)
    fill = float(omega.min()) - 1.0 if omega.size else -1.0
    padded = np.full((size, size), fill)
    padded[:n, :m] = omega
    return padded


def hungarian_assign(omega: np.ndarray) -> AlignmentResult:
    """Exact maximum-total-similarity assignment (small instances only).

    Ties resolve to the lexicographically smallest assignment. Rectangular
    input yields min(n, m) pairs.
    """
    omega = as_dense(omega, "assignment input")
    n, m = omega.shape
    if max(n, m) > HUNGARIAN_MAX_SIZE:
        raise ParameterError(
            f"hungarian_assign is capped at {HUNGARIAN_MAX_SIZE} per side "
            f"(got {omega.shape}); use sinkhorn + greedy_decode at scale"
        )
    rows, cols = linear_sum_assignment(omega, maximize=True)
    pairs = tuple((int(r), int(c)) for r, c in zip(rows, cols))
    return AlignmentResult(predicted_pairs=pairs, method="hungarian")


def greedy_decode(omega: np.ndarray) -> AlignmentResult:
    """Repeatedly take the largest remaining entry, retiring its row and column.

    Ties break toward the smaller (row, col) pair; pairs are returned in
    selection order.
    """
    omega = as_dense(omega, "assignment input")
    n, m = omega.shape
    rows, cols = np.unravel_index(np.arange(n * m), (n, m))
    order = np.lexsort((cols, rows, -omega.ravel()))
    used_rows = np.zeros(n, dtype=bool)
    used_cols = np.zeros(m, dtype=bool)
    pairs = []
    want = min(n, m)
    for idx in order:
        r, c = int(rows[idx]), int(cols[idx])
        if used_rows[r] or used_cols[c]:
            continue
        used_rows[r] = True
        used_cols[c] = True
        pairs.append((r, c))
        if len(pairs) == want:
            break
    return AlignmentResult(predicted_pairs=tuple(pairs), method="greedy")


def sinkhorn_greedy(omega: np.ndarray, q: int) -> AlignmentResult:
    """Scalable decoding: pad, Sinkhorn-normalize, greedily extract, unpad."""
    n, m = omega.shape
    normalized = sinkhorn(pad_to_square(omega), q)
    decoded = greedy_decode(normalized)
    pairs = tuple((r, c) for r, c in decoded.predicted_pairs if r < n and c < m)
    return AlignmentResult(predicted_pairs=pairs, method="sinkhorn_greedy")


def assignment_score(omega: np.ndarray, result: AlignmentResult) -> float:
    """Total similarity collected by an assignment."""
    return float(sum(omega[r, c] for r, c in result.predicted_pairs))


def evaluate(
    omega: np.ndarray,
    seeds: SeedAlignments,
    ks=(1, 10),
    config_echo: dict | None = None,
) -> EvalReport:
    """Rank every test pair's true counterpart within its row.

    Rank counts strictly greater entries, plus equal entries at smaller
    column index so results are deterministic under ties.
    """
    omega = as_dense(omega, "evaluation input")
    ks = [int(k) for k in ks]
    if not ks or any(k < 1 for k in ks) or sorted(ks) != ks:
        raise ParameterError(f"ks={ks!r} must be non-empty, positive, ascending")
    test = seeds.test_pairs
    if not test:
        raise ParameterError("no test pairs to evaluate")
    ranks = np.empty(len(test))
    for i, (v, v_prime) in enumerate(test):
        row = omega[v]
        target = row[v_prime]
        greater = int((row > target).sum())
        equal_before = int((row[:v_prime] == target).sum())
        ranks[i] = 1 + greater + equal_before
    hits = {k: float((ranks <= k).mean()) for k in ks}
    return EvalReport(
        hits_at=hits,
        mrr=float((1.0 / ranks).mean()),
        num_test=len(test),
        config_echo=dict(config_echo or {}),
    )
