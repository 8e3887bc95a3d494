import json
from pathlib import Path

from corpus.exceptions import CorpusError
from dialogmodel.exceptions import DialogModelError
from django.core.management.base import (
    BaseCommand,
    CommandError,
)
from experiments.exceptions import (
    ExperimentError,
    RunConfigError,
)
from experiments.services import (
    prepare_output_dir,
    write_config_echo,
)
from metrics.exceptions import MetricError
from nnkit.exceptions import NNKitError
from topics.exceptions import TopicModelError


DOMAIN_ERRORS = (
    CorpusError,
    TopicModelError,
    NNKitError,
    DialogModelError,
    MetricError,
    ExperimentError,
)


class RunCommand(BaseCommand):
    """Batch command driven by a JSON run config.

    Flags are merged over the JSON before validation; the whole config is
    validated before the output directory is touched, and the resolved
    config is echoed to `<out>/config.json` before anything else is
    written.
    """

    serializer_class = None

    def add_arguments(self, parser):
        parser.add_argument("--config", help="JSON run config")
        parser.add_argument("--out", help="Output directory")
        parser.add_argument("--seed", type=int, help="Run-wide random seed")
        parser.add_argument(
            "--force",
            action="store_true",
            help="Overwrite a non-empty output directory",
        )

    def load_config(self, path: str | None) -> dict:
        if path is None:
            return {}
        try:
            data = json.loads(Path(path).read_text())
        except FileNotFoundError:
            raise CommandError(f"Run config {path} does not exist")
        except json.JSONDecodeError as e:
            raise CommandError(f"Run config {path} is not valid JSON: {e.msg}")
        if not isinstance(data, dict):
            raise CommandError(f"Run config {path} must hold a JSON object")
        return data

    def apply_overrides(self, data: dict, options: dict) -> dict:
        if options.get("out") is not None:
            data["out"] = options["out"]
        if options.get("seed") is not None:
            data["rng_seed"] = options["seed"]
        if options.get("force"):
            data["force"] = True
        return data

    def validate(self, data: dict):
        serializer = self.serializer_class(data=data)
        if not serializer.is_valid():
            raise RunConfigError(serializer.errors)
        return serializer

    def handle(self, *args, **options):
        data = self.apply_overrides(self.load_config(options["config"]), options)
        try:
            serializer = self.validate(data)
            config = serializer.validated_data
            out = None
            if config.get("out") is not None:
                out = prepare_output_dir(config["out"], config["force"])
                write_config_echo(out, serializer.resolved())
            result = self.run(config, serializer, out)
        except DOMAIN_ERRORS as e:
            raise CommandError(str(e))
        self.report(result, out)

    def run(self, config: dict, serializer, out: Path | None):
        raise NotImplementedError

    def report(self, result, out: Path | None):
        raise NotImplementedError
