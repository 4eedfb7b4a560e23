"""Similarity fusion and neighborhood-consistency refinement with seed pinning.

Each refinement round pins the known seed rows to one-hot indicators,
multiplies the similarity matrix by its own matched-neighborhood consistency
score (A_s W A_t), floors every entry with a small token score so no pair is
ever irrecoverably zero, and renormalizes by row then column.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

import scipy.sparse as sp

from .encoder import SimilarityMatrix
from .errors import ParameterError
from .kg import SeedAlignments
from .linalg import row_col_normalize, spmm
from .validation import as_dense, check_same_shape


@dataclass(frozen=True, eq=False)
class RefinementState:
    """Current similarity matrix, rounds performed, and the token score."""

    omega: np.ndarray = field(repr=False)
    iteration: int
    epsilon: float


def fuse(omega0: SimilarityMatrix, omega_prime: SimilarityMatrix) -> np.ndarray:
    """Hadamard-fuse local and propagated similarities, clamped at zero.

    Negative products are floored to 0 because the multiplicative refinement
    update and row/column normalization presuppose non-negative scores.
    """
    a = as_dense(omega0.values, "local similarity")
    b = as_dense(omega_prime.values, "propagated similarity")
    check_same_shape(a, b, "local similarity", "propagated similarity")
    return np.maximum(a * b, 0.0)


def mnc_approx(a_s, omega: np.ndarray, a_t) -> np.ndarray:
    """Matched-neighborhood consistency scores, approximated as A_s W A_t."""
    if a_s.shape[1] != omega.shape[0] or omega.shape[1] != a_t.shape[0]:
        raise ParameterError(
            f"mnc shape mismatch: {a_s.shape} @ {omega.shape} @ {a_t.shape}"
        )
    a_s = a_s if sp.issparse(a_s) else sp.csr_matrix(a_s)
    a_t = a_t if sp.issparse(a_t) else sp.csr_matrix(a_t)
    left = spmm(a_s, omega)
    return spmm(a_t.T.tocsr(), left.T).T


def pin_seed_rows(omega: np.ndarray, seeds: SeedAlignments) -> np.ndarray:
    """Overwrite each seed row with the one-hot indicator of its counterpart."""
    out = omega.copy()
    for v, v_prime in seeds.train_pairs:
        out[v, :] = 0.0
        out[v, v_prime] = 1.0
    return out


def refine(
    state: RefinementState,
    a_s,
    a_t,
    seeds: SeedAlignments,
    l2: int,
    on_iteration=None,
) -> RefinementState:
    """Run l2 rounds of pin -> consistency update -> row/column normalize.

    ``on_iteration(iteration, omega)`` is called with the normalized matrix
    after each round (e.g. to trace accuracy per round).
    """
    if l2 < 0:
        raise ParameterError(f"l2={l2} must be >= 0")
    omega = state.omega
    iteration = state.iteration
    for _ in range(l2):
        omega = pin_seed_rows(omega, seeds)
        for v, v_prime in seeds.train_pairs:
            if int(np.argmax(omega[v])) != v_prime:
                raise RuntimeError(
                    f"seed row {v} lost its pin to column {v_prime}"
                )
        omega = omega * mnc_approx(a_s, omega, a_t) + state.epsilon
        omega = row_col_normalize(omega)
        iteration += 1
        if on_iteration is not None:
            on_iteration(iteration, omega)
    return RefinementState(omega=omega, iteration=iteration, epsilon=state.epsilon)
