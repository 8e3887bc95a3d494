class DialogModelError(Exception):
    pass


class InvalidModelArgument(DialogModelError, ValueError):
    pass


class ConfigMismatchError(DialogModelError):
    def __init__(self, fields: dict[str, tuple]):
        listed = ", ".join(
            f"{name} ({expected!r} != {found!r})"
            for name, (expected, found) in sorted(fields.items())
        )
        super().__init__(f"Configuration mismatch: {listed}")
        self.fields = fields


class CheckpointLoadError(DialogModelError):
    pass
