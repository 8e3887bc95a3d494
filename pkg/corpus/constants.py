from django.utils.translation import gettext_lazy as _


class ReservedTokens:
    PAD = 0
    SOS = 1
    EOS = 2
    UNK = 3

    TOKENS = ("<pad>", "<sos>", "<eos>", "<unk>")

    CHOICES = (
        (PAD, _("Padding")),
        (SOS, _("Start of sequence")),
        (EOS, _("End of sequence")),
        (UNK, _("Unknown token")),
    )


PUNCTUATION = '.,?!;:"'

FTRK_MAGIC = b"FTRK"
FTRK_VERSION = 1
FTRK_HEADER_FORMAT = "<4sIII"

VOCAB_FORMAT_VERSION = 1


class SynthLexicon:
    """Word material of the synthetic corpus.

    Verbs, objects and places are the cluster-specific content words;
    colors and sounds are shared across clusters.
    """

    CLUSTERS = (
        (
            "cooking",
            ("cooking", "stirring", "chopping"),
            ("pan", "knife", "spoon", "pot"),
            ("kitchen",),
        ),
        (
            "cleaning",
            ("cleaning", "sweeping", "mopping"),
            ("broom", "mop", "bucket", "sponge"),
            ("hallway", "bathroom"),
        ),
        (
            "entertainment",
            ("watching", "playing", "laughing"),
            ("remote", "guitar", "television", "controller"),
            ("livingroom", "den"),
        ),
        (
            "exercise",
            ("stretching", "jogging", "lifting"),
            ("dumbbell", "mat", "towel", "rope"),
            ("gym", "garage"),
        ),
        (
            "laundry",
            ("folding", "ironing", "washing"),
            ("shirt", "basket", "iron", "sock"),
            ("laundryroom", "closet"),
        ),
        (
            "reading",
            ("reading", "writing", "studying"),
            ("book", "pen", "notebook", "lamp"),
            ("bedroom", "office"),
        ),
    )

    COLORS = ("red", "blue", "green", "yellow", "black", "white")

    SOUNDS = (
        "a dog barking",
        "a door closing",
        "water running",
        "music playing",
        "a phone ringing",
        "people talking",
        "a clock ticking",
        "glass breaking",
    )

    PERSONS = (("man", "he"), ("woman", "she"))

    AUDIO_QUESTION = "what do you hear ?"
