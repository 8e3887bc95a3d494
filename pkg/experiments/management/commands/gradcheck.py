from django.core.management.base import CommandError
from experiments.exceptions import GradientCheckFailed
from experiments.management.base import RunCommand
from experiments.serializers import GradcheckRunSerializer
from experiments.services import (
    gradcheck_table,
    run_gradcheck,
)


class Command(RunCommand):
    help = "Check model gradients against central differences for every attention variant and topic mode"
    serializer_class = GradcheckRunSerializer

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument(
            "--inject-fault",
            action="store_true",
            help="Double the matrix-product backward rule; the check must fail",
        )

    def apply_overrides(self, data, options):
        data = super().apply_overrides(data, options)
        if options.get("inject_fault"):
            data["inject_fault"] = True
        return data

    def run(self, config, serializer, out):
        return run_gradcheck(config, out)

    def report(self, result, out):
        self.stdout.write(gradcheck_table(result).export("csv"))
        failures = [
            f"{row['attention_variant']}/{row['topic_mode']}"
            for row in result
            if not row["passed"]
        ]
        if failures:
            # the report is already on disk
            raise CommandError(str(GradientCheckFailed(failures)))
        self.stdout.write(self.style.SUCCESS(f"All {len(result)} combinations passed"))
