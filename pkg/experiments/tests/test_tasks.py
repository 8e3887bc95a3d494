import mock
from django.test import (
    SimpleTestCase,
    override_settings,
)
from experiments.exceptions import RunConfigError
from experiments.tasks import (
    check_gradients_task,
    run_arm_task,
)
from nnkit.gradcheck import GradCheckReport


@override_settings(CELERY_TASK_ALWAYS_EAGER=True)
class CheckGradientsTaskTestCase(SimpleTestCase):
    @mock.patch("experiments.tasks.check_model_gradients")
    def test_result_is_serializable(self, check):
        check.return_value = GradCheckReport(
            max_relative_error=2e-7,
            worst_parameter="encoder.W",
            worst_index=(3,),
            analytic=0.5,
            numeric=0.5000001,
            n_coordinates=9,
        )
        result = check_gradients_task.delay("no_attention", "none", 1e-5, 3).get()
        self.assertEqual(result["attention_variant"], "no_attention")
        self.assertEqual(result["topic_mode"], "none")
        self.assertEqual(result["worst_index"], [3])
        check.assert_called_once_with(
            "no_attention",
            "none",
            eps=1e-5,
            coordinates_per_parameter=3,
            inject_fault=False,
        )

    @mock.patch("experiments.tasks.check_model_gradients", side_effect=ValueError("boom"))
    def test_failure_logged(self, check):
        with self.assertLogs("experiments.tasks", level="ERROR"):
            with self.assertRaises(ValueError):
                check_gradients_task.delay("no_attention", "none", 1e-5, 3).get()


@override_settings(CELERY_TASK_ALWAYS_EAGER=True)
class RunArmTaskTestCase(SimpleTestCase):
    def test_invalid_config(self):
        with self.assertRaises(RunConfigError):
            run_arm_task.delay({"out": "runs/compare"}, "audio", 0).get()

    @mock.patch("experiments.tasks.run_arm")
    def test_validated_config_reaches_arm(self, run_arm):
        run_arm.return_value.to_dict.return_value = {"arm": "audio"}
        result = run_arm_task.delay(
            {"out": "runs/compare", "preset": "audio", "seeds": [4]}, "audio", 4
        ).get()
        self.assertEqual(result, {"arm": "audio"})
        config, arm_name, seed = run_arm.call_args.args
        self.assertEqual(config["synth"]["audio_event_classes"], 4)
        self.assertEqual((arm_name, seed), ("audio", 4))
