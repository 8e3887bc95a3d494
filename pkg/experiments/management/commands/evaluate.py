from experiments.management.base import RunCommand
from experiments.serializers import EvaluateRunSerializer
from experiments.services import run_evaluate
from metrics.constants import (
    REPORT_CSV_HEADERS,
    Subsets,
)


def _format(value) -> str:
    return "-" if value is None else f"{value:.4f}"


class Command(RunCommand):
    help = "Score generated answers against the corpus references"
    serializer_class = EvaluateRunSerializer

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument("--hypotheses", help="Generation JSON-lines file")
        parser.add_argument("--corpus", help="Corpus file")
        parser.add_argument(
            "--subset",
            action="append",
            choices=[name for name, _ in Subsets.CHOICES],
            help="Also score a subset; repeatable",
        )

    def apply_overrides(self, data, options):
        data = super().apply_overrides(data, options)
        for name in ("hypotheses", "corpus"):
            if options.get(name) is not None:
                data[name] = options[name]
        if options.get("subset"):
            data["subsets"] = list(data.get("subsets") or []) + options["subset"]
        return data

    def run(self, config, serializer, out):
        return run_evaluate(config, out)

    def write_row(self, name: str, report):
        scores = [*report.bleu, report.meteor, report.rouge_l, report.cider]
        binary = report.binary
        self.stdout.write(
            f"{name:<12} n={report.n_pairs:<6} "
            + " ".join(_format(score) for score in scores)
            + f"  P/R/F1 {_format(binary.precision)}/{_format(binary.recall)}"
            f"/{_format(binary.f1)} (support {binary.support})"
        )

    def report(self, result, out):
        self.stdout.write(f"{'':<21} " + " ".join(REPORT_CSV_HEADERS))
        self.write_row("all", result)
        for name, subset in result.subsets.items():
            self.write_row(name, subset)
