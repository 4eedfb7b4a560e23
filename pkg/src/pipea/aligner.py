"""End-to-end aligner with a scikit-learn estimator interface.

``PipeAligner`` exposes every pipeline hyperparameter through
``get_params``/``set_params`` so runs compose with ``sklearn.base.clone``,
grid sweeps, and the rest of the estimator ecosystem. ``fit`` consumes a
``DatasetBundle`` (plus an optional imported similarity matrix), runs
encode -> operator -> propagate -> factorize -> fuse -> refine, and stores
the final similarity; ``predict`` decodes one-to-one pairs from it.
"""

from __future__ import annotations

import logging
import time

import numpy as np
from sklearn.base import BaseEstimator

from .config import DENSE_CUTOFF, PipelineConfig
from .decode import (
    AlignmentResult,
    EvalReport,
    evaluate,
    greedy_decode,
    pad_to_square,
    sinkhorn,
    sinkhorn_greedy,
)
from .encoder import SimilarityMatrix, builtin_encoder
from .errors import ParameterError
from .kg import DatasetBundle
from .operator import (
    build_operator,
    factorize_embed,
    global_similarity,
    propagate_push,
    propagate_series,
)
from .refine import RefinementState, fuse, refine

logger = logging.getLogger(__name__)


class PipeAligner(BaseEstimator):
    """Cross-graph similarity propagation, refinement, and alignment decoding.

    Parameters mirror :class:`pipea.config.PipelineConfig`; see there for
    meanings and defaults. ``dense_cutoff`` picks the propagation backend
    when ``propagation="auto"``: the dense walk series up to n+m nodes, the
    sparse push approximation above.
    """

    def __init__(
        self,
        alpha=0.7,
        beta=0.5,
        k=2,
        delta=1e-4,
        d=128,
        epsilon=1e-5,
        l1=8,
        l2=8,
        q=10,
        hops=2,
        rng_seed=0,
        decode="sinkhorn",
        propagation="auto",
        no_refine=False,
        no_initial=False,
        no_propagation=False,
        dense_cutoff=DENSE_CUTOFF,
    ):
        self.alpha = alpha
        self.beta = beta
        self.k = k
        self.delta = delta
        self.d = d
        self.epsilon = epsilon
        self.l1 = l1
        self.l2 = l2
        self.q = q
        self.hops = hops
        self.rng_seed = rng_seed
        self.decode = decode
        self.propagation = propagation
        self.no_refine = no_refine
        self.no_initial = no_initial
        self.no_propagation = no_propagation
        self.dense_cutoff = dense_cutoff

    @classmethod
    def from_config(cls, config: PipelineConfig, dense_cutoff=DENSE_CUTOFF):
        return cls(dense_cutoff=dense_cutoff, **config.to_dict())

    def config(self) -> PipelineConfig:
        params = self.get_params()
        params.pop("dense_cutoff")
        return PipelineConfig(**params)

    def _stage(self, name, func, *args, **kwargs):
        start = time.perf_counter()
        result = func(*args, **kwargs)
        elapsed = time.perf_counter() - start
        self.timings_[name] = elapsed
        logger.info("stage %-12s %8.3fs", name, elapsed)
        return result

    _FIT_ATTRS = (
        "timings_", "bundle_", "omega0_", "operator_", "propagation_",
        "propagation_mode_", "x_s_", "x_t_", "omega_prime_", "fused_",
        "refinement_", "refinement_trace_", "similarity_", "ranking_matrix_",
    )

    def fit(self, bundle: DatasetBundle, similarity: SimilarityMatrix | None = None):
        """Run the pipeline on a bundle; ``similarity`` overrides the encoder."""
        config = self.config().validate()
        for name in self._FIT_ATTRS:  # drop anything cached by a previous fit
            if hasattr(self, name):
                delattr(self, name)
        self.timings_ = {}
        self.bundle_ = bundle

        omega0 = similarity
        if omega0 is None:
            omega0 = self._stage("encoder", builtin_encoder, bundle, config.hops)
        elif omega0.values.shape != (
            bundle.source.entity_count,
            bundle.target.entity_count,
        ):
            raise ParameterError(
                f"similarity shape {omega0.values.shape} does not match bundle"
            )
        self.omega0_ = omega0

        self.omega_prime_ = None
        if not config.no_propagation:
            op = self._stage(
                "operator", build_operator, bundle, omega0, config.beta, config.k
            )
            self.operator_ = op
            mode = config.propagation
            if mode == "auto":
                mode = "dense" if op.size <= self.dense_cutoff else "push"
            if mode == "dense":
                prop = self._stage(
                    "propagation", propagate_series, op, config.alpha, config.l1
                )
            else:
                # push accuracy tracks the sparsify threshold: pushing mass
                # below delta would be discarded by the factorization anyway
                prop = self._stage(
                    "propagation", propagate_push, op, config.alpha, config.delta
                )
            self.propagation_mode_ = mode
            self.propagation_ = prop
            x_s, x_t = self._stage(
                "svd", factorize_embed, prop, config.delta, config.d, config.rng_seed
            )
            self.x_s_, self.x_t_ = x_s, x_t
            self.omega_prime_ = global_similarity(x_s, x_t)

        if config.no_initial:
            base = np.maximum(self.omega_prime_.values, 0.0)
        elif config.no_propagation:
            base = omega0.values
        else:
            base = fuse(omega0, self.omega_prime_)
        self.fused_ = base

        if config.no_refine:
            final = base
            self.refinement_ = None
        else:
            state = RefinementState(
                omega=np.maximum(base, 0.0), iteration=0, epsilon=config.epsilon
            )
            trace: list[tuple[int, float]] = []

            def record(iteration, omega):
                if bundle.seeds.test_pairs:
                    report = evaluate(omega, bundle.seeds, ks=(1,))
                    trace.append((iteration, report.hits_at[1]))

            state = self._stage(
                "refinement",
                refine,
                state,
                bundle.source.adjacency,
                bundle.target.adjacency,
                bundle.seeds,
                config.l2,
                on_iteration=record,
            )
            self.refinement_ = state
            self.refinement_trace_ = trace
            final = state.omega
        self.similarity_ = final
        return self

    def _check_fitted(self):
        if not hasattr(self, "similarity_"):
            raise ParameterError("aligner is not fitted; call fit first")

    def ranking_matrix(self) -> np.ndarray:
        """Matrix actually ranked/decoded under the configured decode mode."""
        self._check_fitted()
        if self.decode == "raw":
            return self.similarity_
        if not hasattr(self, "ranking_matrix_"):
            n, m = self.similarity_.shape
            normalized = self._stage(
                "decode", sinkhorn, pad_to_square(self.similarity_), self.q
            )
            self.ranking_matrix_ = normalized[:n, :m]
        return self.ranking_matrix_

    def predict(self) -> AlignmentResult:
        """Decode one-to-one alignment pairs from the fitted similarities."""
        self._check_fitted()
        if self.decode == "raw":
            return greedy_decode(self.similarity_)
        return sinkhorn_greedy(self.similarity_, self.q)

    def evaluate_report(self, ks=(1, 10)) -> EvalReport:
        """Rank the held-out test pairs under the configured decode mode."""
        self._check_fitted()
        return evaluate(
            self.ranking_matrix(),
            self.bundle_.seeds,
            ks=ks,
            config_echo=self.config().to_dict(),
        )

    def score(self, bundle=None) -> float:
        """Hits@1 on the fitted bundle's test pairs (sklearn-style score)."""
        if bundle is not None:
            self.fit(bundle)
        return self.evaluate_report(ks=(1,)).hits_at[1]
