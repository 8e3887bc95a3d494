from django.utils.translation import gettext_lazy as _


class BinaryClasses:
    YES = "yes"
    NO = "no"
    OTHER = "other"

    CHOICES = (
        (YES, _("Yes")),
        (NO, _("No")),
        (OTHER, _("Other")),
    )


class Subsets:
    COREFERENCE = "coreference"
    AUDIO = "audio"
    BINARY = "binary"

    CHOICES = (
        (COREFERENCE, _("Questions containing coreferences")),
        (AUDIO, _("Audio-related questions")),
        (BINARY, _("Binary answers")),
    )


REPORT_CSV_HEADERS = ("Bleu1", "Bleu2", "Bleu3", "Bleu4", "Meteor", "Rouge", "CIDEr")

BLEU_MAX_N = 4
ROUGE_BETA = 1.2
CIDER_MAX_N = 4
CIDER_SCALE = 10.0
METEOR_PENALTY_GAMMA = 0.5
METEOR_PENALTY_EXPONENT = 3
