from django.utils.translation import gettext_lazy as _


class AttentionVariants:
    NO_ATTENTION = "no_attention"
    WORD_ALL_STATES = "word_all_states"
    WORD_LAST_STATES = "word_last_states"
    SENT_ALL_STATES = "sent_all_states"
    SENT_ALL_STATES_PLUS_AV = "sent_all_states_plus_av"

    CHOICES = (
        (NO_ATTENTION, _("No attention (baseline)")),
        (WORD_ALL_STATES, _("Word LSTM, all states")),
        (WORD_LAST_STATES, _("Word LSTM, last state per turn")),
        (SENT_ALL_STATES, _("Sentence LSTM, all states")),
        (SENT_ALL_STATES_PLUS_AV, _("Sentence LSTM, all states plus AV")),
    )
    WORD_LEVEL = (WORD_ALL_STATES, WORD_LAST_STATES)


class TopicModes:
    NONE = "none"
    DECODER_FEATURE = "decoder_feature"
    TOPIC_EMBEDDING = "topic_embedding"
    HISTORY_FEATURE = "history_feature"

    CHOICES = (
        (NONE, _("No topics")),
        (DECODER_FEATURE, _("Topic vector on every decoder input")),
        (TOPIC_EMBEDDING, _("Learned embedding of the dominant topic")),
        (HISTORY_FEATURE, _("Turn topic vector on the sentence LSTM input")),
    )


class DecodeModes:
    GREEDY = "greedy"
    BEAM = "beam"

    CHOICES = (
        (GREEDY, _("Greedy")),
        (BEAM, _("Beam search")),
    )


CHECKPOINT_FORMAT = "scenedialog.model"
BEST_CHECKPOINT_NAME = "best.ckpt"
CHECKPOINTS_DIRNAME = "checkpoints"
LOSS_CURVE_HEADERS = ("epoch", "train_loss", "val_loss")
