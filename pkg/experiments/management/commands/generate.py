from experiments.constants import RunFiles
from experiments.management.base import RunCommand
from experiments.serializers import GenerateRunSerializer
from experiments.services import run_generate


class Command(RunCommand):
    help = "Generate answers for every turn of a corpus from a checkpoint"
    serializer_class = GenerateRunSerializer

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument("--checkpoint", help="Model checkpoint")
        parser.add_argument("--corpus", help="Corpus file")
        parser.add_argument(
            "--dump-attention",
            action="store_true",
            help="Add per-step attention weights to every record",
        )

    def apply_overrides(self, data, options):
        data = super().apply_overrides(data, options)
        for name in ("checkpoint", "corpus"):
            if options.get(name) is not None:
                data[name] = options[name]
        if options.get("dump_attention"):
            decode = dict(data.get("decode") or {})
            decode["dump_attention"] = True
            data["decode"] = decode
        return data

    def run(self, config, serializer, out):
        return run_generate(config, out)

    def report(self, result, out):
        self.stdout.write(
            self.style.SUCCESS(
                f"Wrote {len(result)} generations to {out / RunFiles.GENERATIONS}"
            )
        )
