from experiments.constants import RunFiles
from experiments.management.base import RunCommand
from experiments.serializers import TrainRunSerializer
from experiments.services import run_train


class Command(RunCommand):
    help = "Train a dialog model; writes checkpoints and the loss curve"
    serializer_class = TrainRunSerializer

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument("--corpus", help="Training corpus file")
        parser.add_argument("--resume", help="Checkpoint to resume from")

    def apply_overrides(self, data, options):
        data = super().apply_overrides(data, options)
        for name in ("corpus", "resume"):
            if options.get(name) is not None:
                data[name] = options[name]
        return data

    def run(self, config, serializer, out):
        return run_train(config, out)

    def report(self, result, out):
        for record in result.history:
            val = "-" if record.val_loss is None else f"{record.val_loss:.6f}"
            self.stdout.write(
                f"epoch {record.epoch:4d}  train {record.train_loss:.6f}  val {val}"
            )
        if result.best_epoch is not None:
            self.stdout.write(
                self.style.SUCCESS(
                    f"Best epoch {result.best_epoch} (loss {result.best_loss:.6f}); "
                    f"loss curve in {out / RunFiles.LOSS_CURVE}"
                )
            )
