from experiments.management.base import RunCommand
from experiments.serializers import TopicsRunSerializer
from experiments.services import run_topics


class Command(RunCommand):
    help = "Fit a standard or guided topic model on a corpus"
    serializer_class = TopicsRunSerializer

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument("--corpus", help="Corpus file")
        parser.add_argument("--seeds", help="JSON seed words {topic: [words]}")

    def apply_overrides(self, data, options):
        data = super().apply_overrides(data, options)
        for name in ("corpus", "seeds"):
            if options.get(name) is not None:
                data[name] = options[name]
        return data

    def run(self, config, serializer, out):
        return run_topics(config, out)

    def report(self, result, out):
        kind = "guided" if result.guided else "standard"
        self.stdout.write(f"Fitted {kind} topic model: {result.model_path}")
        for topic, words in enumerate(result.top_words):
            self.stdout.write(f"  topic {topic}: {' '.join(words)}")
