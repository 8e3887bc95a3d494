from corpus.factories import SynthSpecFactory
from corpus.synth import synthesize_corpus
from django.test import SimpleTestCase
from experiments.constants import TopicKinds
from experiments.pipeline import (
    fit_topic_model,
    guided_seed_sets,
)
from experiments.serializers import TopicBlockSerializer


class FitTopicModelTestCase(SimpleTestCase):
    def setUp(self):
        self.corpus = synthesize_corpus(SynthSpecFactory())

    def topic_block(self, **data) -> dict:
        serializer = TopicBlockSerializer(data=data)
        self.assertTrue(serializer.is_valid(), serializer.errors)
        return serializer.validated_data

    def test_block_values_reach_params(self):
        block = self.topic_block(K=4, beta=0.05, n_iterations=2, seed_confidence=0.5)
        model, documents = fit_topic_model(self.corpus, block, TopicKinds.LDA, rng_seed=3)
        self.assertTrue(documents)
        params = model.params
        self.assertEqual(params.K, 4)
        self.assertEqual(params.alpha, 12.5)
        self.assertEqual(params.beta, 0.05)
        self.assertEqual(params.n_iterations, 2)
        self.assertEqual(params.seed_confidence, 0.5)
        self.assertEqual(params.rng_seed, 3)

    def test_arm_overrides(self):
        block = self.topic_block(K=4, alpha=0.1, n_iterations=2)
        seed_sets = guided_seed_sets(K=2, n_clusters=2)
        model, _ = fit_topic_model(
            self.corpus, block, TopicKinds.GUIDED, rng_seed=0, K=2, seed_sets=seed_sets
        )
        self.assertEqual(model.K, 2)
        self.assertEqual(model.params.alpha, 0.1)
        self.assertEqual(dict(model.params.seed_sets), seed_sets)
