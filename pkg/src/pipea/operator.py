"""Cross-graph propagation: block operator, walk series, push, factorization.

The operator stacks both graphs into one (n+m)-node system: the diagonal
blocks are the damped row-normalized adjacencies (intra-graph moves), the
off-diagonal blocks route the remaining probability across graphs along the
strongest similarity candidates, with seed rows hard-wired to their known
counterpart. Truncated random-walk mass through this operator is then
factorized into low-rank embeddings whose inner products give the
globally-propagated similarities.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .encoder import SimilarityMatrix
from .errors import DegenerateInputError, IntegrityError, ParameterError
from .kg import DatasetBundle, normalized_adjacency
from .linalg import (
    randomized_svd,
    row_topk_l2_normalize,
    spmm,
    threshold_sparsify_log,
)
from .validation import check_fraction, check_positive_int


@dataclass(frozen=True, eq=False)
class PipOperator:
    """(n+m) x (n+m) block propagation operator and its block sizes."""

    matrix: sp.csr_matrix = field(repr=False)
    n: int
    m: int
    beta: float

    @property
    def size(self) -> int:
        return self.n + self.m


@dataclass(frozen=True, eq=False)
class PropagationResult:
    """Accumulated walk mass S plus how far the series was carried.

    The series backend materializes ``s`` densely; the push backend keeps it
    sparse, which is the whole point of using push on large systems.
    """

    s: np.ndarray | sp.csr_matrix = field(repr=False)
    iterations_used: int
    tail_bound: float
    n: int
    m: int

    def dense_mass(self) -> np.ndarray:
        return self.s.toarray() if sp.issparse(self.s) else self.s


def build_operator(
    bundle: DatasetBundle, omega0: SimilarityMatrix, beta: float, k: int
) -> PipOperator:
    """Assemble the four blocks: damped intra-graph walks, top-k cross moves.

    Cross-graph rows of seed entities are pinned one-hot to their aligned
    counterpart; all other rows keep their k best candidates, l2-normalized.
    """
    check_fraction(beta, "beta", 0.0, 1.0)
    check_positive_int(k, "k")
    n = bundle.source.entity_count
    m = bundle.target.entity_count
    if omega0.values.shape != (n, m):
        raise IntegrityError(
            f"similarity matrix is {omega0.values.shape}, bundle expects {(n, m)}"
        )
    pins_src = {v: v_prime for v, v_prime in bundle.seeds.train_pairs}
    pins_tgt = {v_prime: v for v, v_prime in bundle.seeds.train_pairs}
    top_right = row_topk_l2_normalize(omega0.values, k, pins_src)
    bottom_left = row_topk_l2_normalize(omega0.values.T.copy(), k, pins_tgt)
    intra_s = beta * normalized_adjacency(bundle.source)
    intra_t = beta * normalized_adjacency(bundle.target)
    matrix = sp.bmat(
        [
            [intra_s, (1.0 - beta) * top_right],
            [(1.0 - beta) * bottom_left, intra_t],
        ],
        format="csr",
    )
    matrix.eliminate_zeros()
    matrix.sort_indices()
    return PipOperator(matrix=matrix, n=n, m=m, beta=beta)


def propagate_series(op: PipOperator, alpha: float, l1: int) -> PropagationResult:
    """Truncated restart series S = sum_{l<l1} alpha (1-alpha)^l Lambda^l."""
    check_fraction(alpha, "alpha", 0.0, 1.0, low_open=True)
    check_positive_int(l1, "l1")
    size = op.size
    s = np.zeros((size, size))
    r = np.eye(size)
    for _ in range(l1):
        s += alpha * r
        r = (1.0 - alpha) * spmm(op.matrix, r)
    return PropagationResult(
        s=s,
        iterations_used=l1,
        tail_bound=(1.0 - alpha) ** l1,
        n=op.n,
        m=op.m,
    )


def propagate_push(
    op: PipOperator, alpha: float, residual_eps: float
) -> PropagationResult:
    """Forward-push approximation of the same series, all sources at once.

    Row u of the residual matrix is the walk mass not yet absorbed for source
    u. Each sweep pushes every entry above residual_eps: alpha of it moves to
    the reserve, the rest spreads along the operator row. Mass still parked
    below the threshold at the end contributes its restart share alpha*r, so
    residual_eps >= 1 degenerates to exactly alpha*I.
    """
    check_fraction(alpha, "alpha", 0.0, 1.0, low_open=True)
    if residual_eps <= 0:
        raise ParameterError(f"residual_eps={residual_eps!r} must be positive")
    size = op.size
    reserve = sp.csr_matrix((size, size))
    residual = sp.identity(size, format="csr")
    sweeps = 0
    while True:
        active = residual.multiply(residual > residual_eps).tocsr()
        if active.nnz == 0:
            break
        reserve = reserve + alpha * active
        residual = residual - active + (1.0 - alpha) * (active @ op.matrix)
        residual.eliminate_zeros()
        sweeps += 1
    s = (reserve + alpha * residual).tocsr()
    s.eliminate_zeros()
    s.sort_indices()
    return PropagationResult(
        s=s,
        iterations_used=sweeps,
        tail_bound=(1.0 - alpha) ** sweeps,
        n=op.n,
        m=op.m,
    )


def factorize_embed(
    prop: PropagationResult, delta: float, d: int, rng_seed: int = 0
):
    """Sparsify-log the walk mass, factorize to rank d, split the embeddings.

    Returns (X_s, X_t) with X = U sqrt(Sigma) split at the source block size.
    """
    size = prop.n + prop.m
    if not 1 <= d <= size:
        raise ParameterError(f"rank d={d} must be in [1, {size}]")
    sl = threshold_sparsify_log(prop.s, delta)
    if sl.nnz == 0:
        raise DegenerateInputError(
            f"no propagation mass exceeds delta={delta!r}; lower delta"
        )
    u, sigma, _ = randomized_svd(sl, d, rng_seed=rng_seed)
    x = u * np.sqrt(sigma)
    return x[: prop.n], x[prop.n :]


def global_similarity(x_s: np.ndarray, x_t: np.ndarray) -> SimilarityMatrix:
    """Propagated similarities: inner products of source and target embeddings."""
    if x_s.ndim != 2 or x_t.ndim != 2 or x_s.shape[1] != x_t.shape[1]:
        raise ParameterError(
            f"embedding dimension mismatch: {x_s.shape} vs {x_t.shape}"
        )
    return SimilarityMatrix(values=x_s @ x_t.T, provenance="propagated")
