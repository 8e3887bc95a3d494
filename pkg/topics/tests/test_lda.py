import shutil
import tempfile
from pathlib import Path

import numpy as np
import pytest
from django.test import SimpleTestCase
from topics.exceptions import (
    InternalConsistencyError,
    InvalidTopicArgument,
    TopicModelFormatError,
)
from topics.factories import (
    TopicParamsFactory,
    build_topic_model,
    cluster_documents,
)
from topics.lda import (
    fit_guided_lda,
    fit_lda,
    gibbs_conditional,
    infer_theta,
    load_topic_model,
    purity,
    save_topic_model,
    top_words,
)


class GibbsConditionalTestCase(SimpleTestCase):
    def test_hand_evaluated_fixture(self):
        """Testing doc ["a","a"] with the other token on topic 0"""
        model = build_topic_model(
            ("a", "b"), [[1, 0], [0, 0]], n_dk=[[1, 0]], alpha=1.0, beta=1.0
        )
        probabilities = gibbs_conditional(model, 0, 0)
        self.assertAlmostEqual(probabilities[0], 8 / 11, delta=1e-12)
        self.assertAlmostEqual(probabilities[1], 3 / 11, delta=1e-12)

    def test_excluded_assignment(self):
        """Testing exclusion of the resampled token from full counts"""
        model = build_topic_model(
            ("a", "b"), [[2, 0], [0, 0]], n_dk=[[2, 0]], alpha=1.0, beta=1.0
        )
        probabilities = gibbs_conditional(model, 0, 0, excluded_assignment=0)
        np.testing.assert_allclose(probabilities, [8 / 11, 3 / 11], atol=1e-12)

    def test_single_topic(self):
        model = build_topic_model(("a", "b"), [[3, 1]], n_dk=[[4]])
        self.assertEqual(gibbs_conditional(model, 0, 1).tolist(), [1.0])

    def test_fresh_counts_uniform(self):
        model = build_topic_model(("a", "b", "c"), np.zeros((4, 3)))
        np.testing.assert_allclose(gibbs_conditional(model, 0, 2), [0.25] * 4)

    def test_negative_count(self):
        model = build_topic_model(("a", "b"), [[0, 1], [0, 0]], n_dk=[[1, 0]])
        with self.assertRaises(InternalConsistencyError):
            gibbs_conditional(model, 0, 0, excluded_assignment=0)

    def test_random_states_normalized(self):
        rng = np.random.default_rng(5)
        for _ in range(20):
            K, V = int(rng.integers(1, 8)), int(rng.integers(1, 12))
            n_kw = rng.integers(0, 30, size=(K, V))
            n_dk = rng.integers(0, 30, size=(3, K))
            model = build_topic_model(
                tuple(f"w{idx}" for idx in range(V)),
                n_kw,
                n_dk=n_dk,
                alpha=float(rng.uniform(0.01, 2)),
                beta=float(rng.uniform(0.01, 2)),
            )
            probabilities = gibbs_conditional(
                model, int(rng.integers(3)), int(rng.integers(V))
            )
            self.assertAlmostEqual(probabilities.sum(), 1.0, delta=1e-12)
            self.assertTrue((probabilities >= 0).all())


class FitLDATestCase(SimpleTestCase):
    def setUp(self):
        self.docs, self.labels = cluster_documents(2, 6, seed=1)

    def test_single_topic_theta(self):
        model = fit_lda(self.docs + [()], TopicParamsFactory(K=1, n_iterations=3))
        for doc_id in range(len(self.docs) + 1):
            self.assertEqual(model.document_theta(doc_id).tolist(), [1.0])

    def test_deterministic(self):
        params = TopicParamsFactory(rng_seed=3)
        first = fit_lda(self.docs, params)
        second = fit_lda(self.docs, params)
        np.testing.assert_array_equal(first.n_kw, second.n_kw)
        np.testing.assert_array_equal(first.n_dk, second.n_dk)

    def test_count_invariants(self):
        model = fit_lda(self.docs, TopicParamsFactory(K=3), check_invariants=True)
        self.assertEqual(
            model.n_dk.sum(axis=1).tolist(), [len(doc) for doc in self.docs]
        )
        np.testing.assert_array_equal(model.n_kw.sum(axis=1), model.n_k)
        np.testing.assert_allclose(model.phi.sum(axis=1), 1.0, atol=1e-9)

    def test_vocabulary_sorted(self):
        model = fit_lda([("b", "a"), ("c",)], TopicParamsFactory())
        self.assertEqual(model.vocab, ("a", "b", "c"))

    def test_empty_vocabulary(self):
        with self.assertRaises(InvalidTopicArgument):
            fit_lda([(), ()], TopicParamsFactory())
        with self.assertRaises(InvalidTopicArgument):
            fit_lda([], TopicParamsFactory())

    def test_invalid_params(self):
        with self.assertRaises(InvalidTopicArgument):
            fit_lda(self.docs, TopicParamsFactory(K=0))
        with self.assertRaises(InvalidTopicArgument):
            fit_lda(self.docs, TopicParamsFactory(alpha=0.0))
        with self.assertRaises(InvalidTopicArgument):
            fit_lda(self.docs, TopicParamsFactory(seed_confidence=1.5))


class FitGuidedLDATestCase(SimpleTestCase):
    def setUp(self):
        self.docs, _ = cluster_documents(2, 5, seed=2)

    def test_empty_seeds_bit_identical(self):
        params = TopicParamsFactory(rng_seed=9, seed_confidence=0.9)
        guided = fit_guided_lda(self.docs, params)
        plain = fit_lda(self.docs, params)
        np.testing.assert_array_equal(guided.n_kw, plain.n_kw)
        np.testing.assert_array_equal(guided.n_dk, plain.n_dk)

    def test_zero_confidence_same_stream(self):
        params = TopicParamsFactory(
            rng_seed=4, seed_sets={0: ("c0w0",)}, seed_confidence=0.0
        )
        guided = fit_guided_lda(self.docs, params)
        plain = fit_lda(self.docs, params)
        np.testing.assert_array_equal(guided.n_kw, plain.n_kw)

    def test_full_confidence_initialization(self):
        docs = [("cook", "pan", "cook"), ("cook", "mop"), ("mop", "broom")]
        params = TopicParamsFactory(
            K=3,
            n_iterations=0,
            seed_sets={0: ("cook",)},
            seed_confidence=1.0,
        )
        model = fit_guided_lda(docs, params)
        cook = model.word_index["cook"]
        self.assertEqual(model.n_kw[0, cook], 3)
        self.assertEqual(model.n_kw[1:, cook].sum(), 0)

    def test_absent_seed_word_warned(self):
        params = TopicParamsFactory(seed_sets={1: ("zebra",)}, seed_confidence=0.5)
        with self.assertLogs("topics.lda", level="WARNING") as logs:
            fit_guided_lda(self.docs, params)
        self.assertIn("zebra", logs.output[0])

    def test_seed_topic_out_of_range(self):
        params = TopicParamsFactory(K=2, seed_sets={2: ("c0w0",)})
        with self.assertRaises(InvalidTopicArgument):
            fit_guided_lda(self.docs, params)


class InferThetaTestCase(SimpleTestCase):
    def setUp(self):
        self.model = build_topic_model(
            ("a", "b"), [[1000, 0], [0, 1000]], alpha=0.1, beta=0.01
        )

    def test_empty_doc_uniform(self):
        theta = infer_theta(self.model, (), 10, rng_seed=0)
        np.testing.assert_allclose(theta, [0.5, 0.5], atol=1e-12)

    def test_single_topic(self):
        model = build_topic_model(("a",), [[4]])
        self.assertEqual(infer_theta(model, ("a", "a"), 5, 1).tolist(), [1.0])

    def test_out_of_vocabulary_doc(self):
        theta = infer_theta(self.model, ("zzz", "yyy"), 10, rng_seed=0)
        self.assertAlmostEqual(theta.sum(), 1.0, delta=1e-9)
        np.testing.assert_allclose(theta, [0.5, 0.5])

    def test_strong_topic(self):
        """Testing a doc whose words all favour topic 0 by far"""
        wins = sum(
            infer_theta(self.model, ("a",) * 10, 20, rng_seed=seed)[0] > 0.8
            for seed in range(5)
        )
        self.assertGreaterEqual(wins, 4)

    def test_deterministic(self):
        doc = ("a", "b", "a")
        np.testing.assert_array_equal(
            infer_theta(self.model, doc, 10, rng_seed=[1, 2, 3]),
            infer_theta(self.model, doc, 10, rng_seed=[1, 2, 3]),
        )


class TopWordsTestCase(SimpleTestCase):
    def test_ranking(self):
        model = build_topic_model(("a", "b", "c"), [[5, 3, 2]], beta=1e-6)
        self.assertEqual(top_words(model, 0, 2), ["a", "b"])

    def test_tie_lexicographic(self):
        model = build_topic_model(("a", "b"), [[5, 5]])
        self.assertEqual(top_words(model, 0, 2), ["a", "b"])

    def test_clamped(self):
        model = build_topic_model(("a", "b"), [[1, 2]])
        self.assertEqual(top_words(model, 0, 10), ["b", "a"])

    def test_topic_out_of_range(self):
        model = build_topic_model(("a", "b"), [[1, 2]])
        with self.assertRaises(InvalidTopicArgument):
            top_words(model, 1, 2)


class TopicModelPersistenceTestCase(SimpleTestCase):
    def setUp(self):
        self.tmp_dir = Path(tempfile.mkdtemp())
        self.addCleanup(shutil.rmtree, self.tmp_dir, True)
        docs, _ = cluster_documents(2, 4, seed=3)
        self.model = fit_guided_lda(
            docs,
            TopicParamsFactory(seed_sets={0: ("c0w1",)}, seed_confidence=0.5),
        )
        self.path = self.tmp_dir / "topics.json"

    def test_round_trip(self):
        save_topic_model(self.model, self.path)
        loaded = load_topic_model(self.path)
        np.testing.assert_array_equal(loaded.n_kw, self.model.n_kw)
        np.testing.assert_array_equal(loaded.n_dk, self.model.n_dk)
        np.testing.assert_array_equal(loaded.n_k, self.model.n_k)
        self.assertEqual(loaded.vocab, self.model.vocab)
        self.assertEqual(loaded.params, self.model.params)

    def test_stable_bytes(self):
        save_topic_model(self.model, self.path)
        save_topic_model(load_topic_model(self.path), self.tmp_dir / "again.json")
        self.assertEqual(
            self.path.read_bytes(), (self.tmp_dir / "again.json").read_bytes()
        )

    def test_inference_after_load(self):
        save_topic_model(self.model, self.path)
        doc = ("c0w1", "c1w2", "c0w3")
        np.testing.assert_array_equal(
            infer_theta(load_topic_model(self.path), doc, 10, 7),
            infer_theta(self.model, doc, 10, 7),
        )

    def test_truncated(self):
        save_topic_model(self.model, self.path)
        self.path.write_bytes(self.path.read_bytes()[:-20])
        with self.assertRaises(TopicModelFormatError):
            load_topic_model(self.path)

    def test_version_mismatch(self):
        save_topic_model(self.model, self.path)
        self.path.write_text(
            self.path.read_text().replace('"version": 1', '"version": 2')
        )
        with self.assertRaises(TopicModelFormatError):
            load_topic_model(self.path)


class PurityTestCase(SimpleTestCase):
    def test_purity(self):
        self.assertEqual(purity([0, 0, 1, 1], [1, 1, 0, 0]), 1.0)
        self.assertEqual(purity([0, 0, 1, 1], [0, 0, 0, 0]), 0.5)
        self.assertEqual(purity([], []), 0.0)

    def test_length_mismatch(self):
        with self.assertRaises(InvalidTopicArgument):
            purity([0], [0, 1])


def fitted_purity(fit, docs, labels, params) -> float:
    model = fit(docs, params)
    predicted = [int(model.n_dk[d].argmax()) for d in range(len(docs))]
    return purity(labels, predicted)


@pytest.mark.slow
class ClusterRecoveryTestCase(SimpleTestCase):
    def setUp(self):
        self.docs, self.labels = cluster_documents(2, 20, seed=0)

    def test_lda_recovers_clusters(self):
        scores = [
            fitted_purity(
                fit_lda,
                self.docs,
                self.labels,
                TopicParamsFactory(n_iterations=200, rng_seed=seed),
            )
            for seed in range(5)
        ]
        self.assertGreaterEqual(np.mean(scores), 0.9)

    def test_guided_at_least_unguided(self):
        seeds = {0: ("c0w0", "c0w1"), 1: ("c1w0", "c1w1")}
        guided, plain = [], []
        for seed in range(5):
            params = TopicParamsFactory(
                n_iterations=200,
                rng_seed=seed,
                seed_sets=seeds,
                seed_confidence=0.9,
            )
            guided.append(
                fitted_purity(fit_guided_lda, self.docs, self.labels, params)
            )
            plain.append(fitted_purity(fit_lda, self.docs, self.labels, params))
        self.assertGreaterEqual(np.mean(guided), np.mean(plain))
