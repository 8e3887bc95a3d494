from experiments.constants import (
    Measures,
    Presets,
    RunFiles,
)
from experiments.management.base import RunCommand
from experiments.serializers import CompareRunSerializer
from experiments.services import run_compare


class Command(RunCommand):
    help = "Train every arm of a comparison preset on several seeds"
    serializer_class = CompareRunSerializer

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument(
            "--preset", choices=[name for name, _ in Presets.CHOICES]
        )

    def apply_overrides(self, data, options):
        data = super().apply_overrides(data, options)
        if options.get("preset") is not None:
            data["preset"] = options["preset"]
        return data

    def run(self, config, serializer, out):
        return run_compare(config, serializer.resolved(), out)

    def report(self, result, out):
        self.stdout.write(
            f"Preset {result['preset']}, reference arm {result['reference_arm']}, "
            f"seeds {result['seeds']}"
        )
        for name, arm in result["arms"].items():
            parts = []
            for measure in Measures.ORDER:
                mean = arm["means"][measure]
                if mean is None:
                    continue
                parts.append(f"{measure} {mean:.4f} ({arm['wins'][measure]} wins)")
            self.stdout.write(f"  {name}: " + ", ".join(parts))
        self.stdout.write(self.style.SUCCESS(f"Summary in {out / RunFiles.SUMMARY}"))
