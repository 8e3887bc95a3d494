from django.utils.translation import gettext_lazy as _


class OptimizerKinds:
    SGD = "sgd"
    ADAM = "adam"

    CHOICES = (
        (SGD, _("Stochastic gradient descent")),
        (ADAM, _("Adam")),
    )


ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPSILON = 1e-8

LSTM_GATES = ("i", "f", "o", "g")
FORGET_BIAS_INIT = 1.0

CHECKPOINT_MAGIC = b"SDCK"
CHECKPOINT_VERSION = 1
