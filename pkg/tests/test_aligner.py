import numpy as np
import pytest
from sklearn.base import clone

from pipea import ConfigError, ParameterError, PipeAligner, PipelineConfig
from pipea.encoder import SimilarityMatrix
from support import random_bundle


@pytest.fixture(scope="module")
def bundle():
    return random_bundle(n=60, edge_prob=0.08, seed_ratio=0.1, rng_seed=0)


def small_aligner(**overrides):
    params = dict(d=24, rng_seed=0)
    params.update(overrides)
    return PipeAligner(**params)


def test_get_set_params_round_trip():
    aligner = small_aligner(alpha=0.9, k=3)
    params = aligner.get_params()
    assert params["alpha"] == 0.9 and params["k"] == 3
    other = clone(aligner)
    assert other.get_params() == params


def test_config_round_trip():
    aligner = small_aligner(beta=0.25)
    config = aligner.config()
    assert isinstance(config, PipelineConfig)
    assert config.beta == 0.25
    assert PipeAligner.from_config(config).get_params()["beta"] == 0.25


def test_fit_populates_attributes(bundle):
    aligner = small_aligner().fit(bundle)
    n, m = bundle.source.entity_count, bundle.target.entity_count
    assert aligner.omega0_.values.shape == (n, m)
    assert aligner.omega_prime_.values.shape == (n, m)
    assert aligner.similarity_.shape == (n, m)
    assert aligner.propagation_mode_ == "dense"
    assert set(aligner.timings_) >= {"encoder", "operator", "propagation", "svd", "refinement"}
    report = aligner.evaluate_report(ks=(1, 10))
    assert set(report.hits_at) == {1, 10}
    assert report.config_echo["d"] == 24


def test_fit_deterministic(bundle):
    rep1 = small_aligner().fit(bundle).evaluate_report()
    rep2 = small_aligner().fit(bundle).evaluate_report()
    assert rep1.hits_at == rep2.hits_at
    assert rep1.mrr == rep2.mrr


def test_conflicting_ablations_rejected(bundle):
    with pytest.raises(ConfigError, match="nothing"):
        small_aligner(no_initial=True, no_propagation=True).fit(bundle)


def test_encoder_only_path_keeps_raw_similarities(bundle):
    aligner = small_aligner(no_propagation=True, no_refine=True).fit(bundle)
    assert np.array_equal(aligner.similarity_, aligner.omega0_.values)
    assert aligner.omega_prime_ is None


def test_no_initial_uses_propagated_only(bundle):
    aligner = small_aligner(no_initial=True, no_refine=True).fit(bundle)
    assert np.array_equal(
        aligner.similarity_, np.maximum(aligner.omega_prime_.values, 0.0)
    )


def test_decode_raw_mode(bundle):
    aligner = small_aligner(decode="raw").fit(bundle)
    result = aligner.predict()
    assert result.method == "greedy"
    assert np.array_equal(aligner.ranking_matrix(), aligner.similarity_)


def test_decode_sinkhorn_mode(bundle):
    aligner = small_aligner().fit(bundle)
    assert aligner.predict().method == "sinkhorn_greedy"
    ranked = aligner.ranking_matrix()
    assert ranked.shape == aligner.similarity_.shape


def test_push_and_dense_backends_agree(bundle):
    dense = small_aligner(propagation="dense").fit(bundle)
    push = small_aligner(propagation="push").fit(bundle)
    assert push.propagation_mode_ == "push"
    assert dense.evaluate_report().hits_at[1] == pytest.approx(
        push.evaluate_report().hits_at[1], abs=0.05
    )


def test_auto_backend_cutoff(bundle):
    aligner = small_aligner(dense_cutoff=10).fit(bundle)
    assert aligner.propagation_mode_ == "push"


def test_fit_with_imported_similarity(bundle):
    n, m = bundle.source.entity_count, bundle.target.entity_count
    rng = np.random.default_rng(5)
    sim = SimilarityMatrix(rng.random((n, m)), "imported")
    aligner = small_aligner().fit(bundle, similarity=sim)
    assert aligner.omega0_ is sim
    with pytest.raises(ParameterError, match="shape"):
        small_aligner().fit(bundle, similarity=SimilarityMatrix(np.ones((2, 2)), "imported"))


def test_predict_requires_fit():
    with pytest.raises(ParameterError, match="fit"):
        small_aligner().predict()


def test_score_is_hits_at_one(bundle):
    aligner = small_aligner().fit(bundle)
    assert aligner.score() == aligner.evaluate_report(ks=(1,)).hits_at[1]


def test_invalid_config_rejected_at_fit(bundle):
    with pytest.raises(ConfigError):
        small_aligner(alpha=0.0).fit(bundle)
    with pytest.raises(ConfigError):
        small_aligner(decode="argmax").fit(bundle)


def test_refinement_trace_records_hits(bundle):
    aligner = small_aligner(l2=3).fit(bundle)
    trace = aligner.refinement_trace_
    assert [it for it, _ in trace] == [1, 2, 3]
    assert all(0.0 <= h <= 1.0 for _, h in trace)


def test_refit_clears_stale_state(bundle):
    aligner = small_aligner().fit(bundle)
    ranked_before = aligner.ranking_matrix().copy()
    aligner.set_params(no_propagation=True).fit(bundle)
    assert aligner.omega_prime_ is None
    assert not hasattr(aligner, "operator_")
    assert not np.array_equal(aligner.ranking_matrix(), ranked_before)


def rectangular_bundle():
    """Source path 0-1-2 vs target path 0-1-2-3: unequal entity counts."""
    from pipea.kg import DatasetBundle, KnowledgeGraph, SeedAlignments

    source = KnowledgeGraph.from_triples(
        ["a0", "a1", "a2"], ["r"], [(0, 0, 1), (1, 0, 2)]
    )
    target = KnowledgeGraph.from_triples(
        ["b0", "b1", "b2", "b3"], ["r"], [(0, 0, 1), (1, 0, 2), (2, 0, 3)]
    )
    seeds = SeedAlignments(((0, 0),), ((1, 1), (2, 2)))
    return DatasetBundle(source, target, seeds)


def test_unequal_graph_sizes_run_end_to_end():
    bundle = rectangular_bundle()
    aligner = PipeAligner(d=4, l1=4, l2=4).fit(bundle)
    assert aligner.similarity_.shape == (3, 4)
    result = aligner.predict()
    assert len(result.predicted_pairs) <= 3
    for s, t in result.predicted_pairs:
        assert s < 3 and t < 4
    report = aligner.evaluate_report(ks=(1, 4))
    assert 0.0 <= report.hits_at[1] <= report.hits_at[4] <= 1.0


def test_stage_artifacts_export_round_trip(tmp_path, bundle):
    from pipea.encoder import read_dense_matrix, write_dense_matrix
    from pipea.linalg import threshold_sparsify_log

    aligner = small_aligner().fit(bundle)
    for name, values in (
        ("x_s.f32", aligner.x_s_),
        ("x_t.f32", aligner.x_t_),
        ("mass.f32", threshold_sparsify_log(aligner.propagation_.s, 1e-4).toarray()),
    ):
        path = tmp_path / name
        write_dense_matrix(path, values)
        back = read_dense_matrix(path)
        assert back.shape == values.shape
        assert np.allclose(back, values, atol=1e-6)
