from celery import shared_task
from celery.utils.log import get_task_logger
from dialogmodel.gradcheck import check_model_gradients
from experiments.arms import run_arm
from experiments.exceptions import RunConfigError
from experiments.serializers import CompareRunSerializer


logger = get_task_logger(__name__)


@shared_task
def check_gradients_task(
    attention_variant: str,
    topic_mode: str,
    eps: float,
    coordinates_per_parameter: int | None,
    inject_fault: bool = False,
) -> dict:
    try:
        report = check_model_gradients(
            attention_variant,
            topic_mode,
            eps=eps,
            coordinates_per_parameter=coordinates_per_parameter,
            inject_fault=inject_fault,
        )
    except Exception:
        logger.exception("Gradient check %s/%s failed", attention_variant, topic_mode)
        raise
    return {
        "attention_variant": attention_variant,
        "topic_mode": topic_mode,
        **report.to_dict(),
    }


@shared_task
def run_arm_task(config: dict, arm_name: str, seed: int) -> dict:
    """One (arm, seed) run of a comparison; `config` is the resolved run
    config as echoed to the output directory.
    """
    serializer = CompareRunSerializer(data=config)
    if not serializer.is_valid():
        raise RunConfigError(serializer.errors)
    try:
        outcome = run_arm(serializer.validated_data, arm_name, seed)
    except Exception:
        logger.exception("Comparison arm %s failed on seed %d", arm_name, seed)
        raise
    return outcome.to_dict()
