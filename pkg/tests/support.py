"""Shared test oracles and fixtures: naive products, dense eigen-oracles,
random operator instances built independently of the code paths they check."""

import numpy as np

from pipea import build_operator, builtin_encoder, generate_synthetic_pair
from pipea.encoder import SimilarityMatrix


def naive_matmul(a, b):
    """Triple-loop dense product; the independent oracle for fast products."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    n, k = a.shape
    k2, m = b.shape
    assert k == k2
    out = np.zeros((n, m))
    for i in range(n):
        for j in range(m):
            acc = 0.0
            for t in range(k):
                acc += a[i, t] * b[t, j]
            out[i, j] = acc
    return out


def random_bundle(n=40, edge_prob=0.15, perturb=0.0, seed_ratio=0.1, rng_seed=0):
    return generate_synthetic_pair(n, edge_prob, perturb, seed_ratio, rng_seed)


def random_operator(n=30, rng_seed=0, beta=0.5, k=1, noise=0.05):
    """Operator over a random aligned pair with noisy encoder similarities.

    k=1 keeps every row sum <= 1, which the series tail bound requires.
    """
    bundle = random_bundle(n=n, rng_seed=rng_seed)
    rng = np.random.default_rng(rng_seed + 1)
    base = builtin_encoder(bundle, hops=2).values
    jitter = noise * rng.random(base.shape)
    omega0 = SimilarityMatrix(values=base + jitter, provenance="builtin")
    return build_operator(bundle, omega0, beta=beta, k=k)


def dominant_eigenspace(sym, d):
    """Dense eigendecomposition oracle: top-d eigenvectors by |eigenvalue|."""
    w, v = np.linalg.eigh(sym)
    order = np.argsort(-np.abs(w))
    return w[order], v[:, order[:d]]


def principal_angle(basis, q):
    """Largest principal angle between two orthonormal column spans."""
    sigma = np.linalg.svd(basis.T @ q, compute_uv=False)
    return float(np.arccos(np.clip(sigma.min(), -1.0, 1.0)))


def subspace_iteration(sym, d, iters, rng_seed=0, on_iter=None):
    """Orthogonal (QR) subspace iteration toward the dominant eigenspace."""
    rng = np.random.default_rng(rng_seed)
    q, _ = np.linalg.qr(rng.standard_normal((sym.shape[0], d)))
    for t in range(1, iters + 1):
        q, _ = np.linalg.qr(sym @ q)
        if on_iter is not None:
            on_iter(t, q)
    return q


def symmetrized_operator_with_gap(seed, d, n=25, max_ratio=0.92):
    """Random symmetrized operator with a verified |eigenvalue| gap at d."""
    for attempt in range(50):
        op = random_operator(n=n, rng_seed=seed * 100 + attempt, k=2)
        dense = op.matrix.toarray()
        sym = 0.5 * (dense + dense.T)
        w, _ = dominant_eigenspace(sym, d)
        mags = np.abs(w)
        if mags[d] / mags[d - 1] <= max_ratio and np.all(np.diff(mags[: d + 1]) < -1e-8):
            return sym
    raise AssertionError("could not find an operator with a clean eigengap")
