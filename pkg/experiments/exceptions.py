class ExperimentError(Exception):
    pass


class OutputExistsError(ExperimentError):
    def __init__(self, path):
        super().__init__(f"Output directory {path} is not empty; pass --force to overwrite")
        self.path = path


class RunConfigError(ExperimentError):
    def __init__(self, errors: dict):
        super().__init__("Invalid run config: " + "; ".join(flatten_errors(errors)))
        self.errors = errors


class GradientCheckFailed(ExperimentError):
    def __init__(self, failures: list[str]):
        super().__init__(f"Gradient check failed for {', '.join(failures)}")
        self.failures = failures


def flatten_errors(errors, prefix: str = "") -> list[str]:
    """`field.sub: message` lines from nested serializer errors"""
    if isinstance(errors, dict):
        lines = []
        for key, value in errors.items():
            if key == "non_field_errors":
                child = prefix
            else:
                child = f"{prefix}.{key}" if prefix else key
            lines.extend(flatten_errors(value, child))
        return lines
    if isinstance(errors, list):
        if all(not isinstance(item, (dict, list)) for item in errors):
            text = " ".join(str(item) for item in errors)
            return [f"{prefix}: {text}" if prefix else text]
        lines = []
        for index, item in enumerate(errors):
            lines.extend(flatten_errors(item, f"{prefix}[{index}]"))
        return lines
    return [f"{prefix}: {errors}" if prefix else str(errors)]
