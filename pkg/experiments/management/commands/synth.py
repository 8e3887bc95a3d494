from experiments.management.base import RunCommand
from experiments.serializers import SynthRunSerializer
from experiments.services import run_synth


class Command(RunCommand):
    help = "Synthesize a dialog corpus with feature tracks"
    serializer_class = SynthRunSerializer

    def run(self, config, serializer, out):
        return run_synth(config, out)

    def report(self, result, out):
        modalities = ", ".join(result.modalities) or "none"
        self.stdout.write(
            self.style.SUCCESS(
                f"Wrote {result.n_dialogs} dialogs, {result.n_turns} turns "
                f"(modalities: {modalities}) to {result.corpus_path}"
            )
        )
