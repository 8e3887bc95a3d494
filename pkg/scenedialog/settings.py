"""
Django settings for the scenedialog project.

Every experiment default lives here; run configs override them per command.

For more information on this file, see
https://docs.djangoproject.com/en/5.0/topics/settings/
"""

import os
from pathlib import Path


# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent


# SECURITY WARNING: keep the secret key used in production secret!
SECRET_KEY = os.environ.get(
    "DJANGO_SECRET_KEY",
    "django-insecure-k4r^p0v9m2@s8e!dwq3z&c1y6t(5j7hn=ub)xofa-g0l%i#e2",
)

DEBUG = os.environ.get("DJANGO_DEBUG", "1") == "1"

ALLOWED_HOSTS = []


# Application definition

INSTALLED_APPS = [
    "django.contrib.contenttypes",
    "django.contrib.auth",
    # 3rd party apps
    "rest_framework",
    # local apps
    "corpus",
    "topics",
    "nnkit",
    "dialogmodel",
    "metrics",
    "experiments",
]


# Database
# Nothing is persisted through the ORM; the file is never created by the
# batch commands.

DATABASES = {
    "default": {
        "ENGINE": "django.db.backends.sqlite3",
        "NAME": BASE_DIR / "db.sqlite3",
    }
}


# Internationalization

LANGUAGE_CODE = "en-us"

TIME_ZONE = "UTC"

USE_I18N = True

USE_TZ = True

DEFAULT_AUTO_FIELD = "django.db.models.BigAutoField"


# Logging

AVSD_LOG_LEVEL = os.environ.get("AVSD_LOG_LEVEL", "INFO")

LOGGING = {
    "version": 1,
    "disable_existing_loggers": False,
    "formatters": {
        "verbose": {
            "format": "%(asctime)s %(levelname)s %(name)s %(message)s",
        },
    },
    "handlers": {
        "console": {
            "class": "logging.StreamHandler",
            "formatter": "verbose",
        },
    },
    "loggers": {
        app: {
            "handlers": ["console"],
            "level": AVSD_LOG_LEVEL,
            "propagate": False,
        }
        for app in (
            "corpus",
            "topics",
            "nnkit",
            "dialogmodel",
            "metrics",
            "experiments",
        )
    },
}


# Corpus

CORPUS_DEFAULTS = {
    "min_count": 1,
    "qa_separator": "<qa>",
    "corpus_filename": "corpus.jsonl",
    "features_dirname": "features",
    "val_fraction": 0.2,
}

SYNTH_DEFAULTS = {
    "n_dialogs": 32,
    "n_turns_per_dialog": 3,
    "n_topic_clusters": 3,
    "coref_dependency_gap": 0,
    "binary_fraction": 0.0,
    "audio_event_classes": 0,
    "audio_frames": 4,
    "rng_seed": 0,
}


# Topic models

TOPIC_DEFAULTS = {
    "K": 9,
    # alpha defaults to 50 / K when left out of a run config
    "alpha": None,
    "beta": 0.01,
    "n_iterations": 500,
    "seed_confidence": 0.9,
    "fold_in_iterations": 50,
    "category": "history_captions",
    "top_n": 10,
    "rng_seed": 0,
}

TOPIC_STOPWORDS = frozenset(
    [
        "a", "an", "the", "is", "are", "was", "were", "be", "to", "of",
        "in", "on", "at", "and", "or", "it", "he", "she", "they", "this",
        "that", "there", "what", "does", "do", "you", "i", "his", "her",
        "its", "with", "for", "any", "can", "yes", "no", "not", "color",
        "holding", "hear", "much", "still", "him", "them",
    ]
)


# Model

MODEL_DEFAULTS = {
    "embedding_dim": 64,
    "word_hidden_dim": 128,
    "sentence_hidden_dim": 128,
    "question_hidden_dim": 128,
    "decoder_hidden_dim": 128,
    "modality_projection_dim": 64,
    "av_dim": 64,
    "topic_embedding_dim": 16,
    "attention_variant": "sent_all_states",
    "topic_mode": "none",
    "topic_source": "question+history",
    "train_embeddings": True,
    "rng_seed": 0,
}

TRAINING_DEFAULTS = {
    "optimizer": "adam",
    "learning_rate": 1e-3,
    "epochs": 30,
    "batch_size": 32,
    "checkpoint_every": 1,
}

DECODE_DEFAULTS = {
    "mode": "greedy",
    "beam_width": 3,
    "max_length": 20,
    "length_penalty": 1.0,
}


# Metrics

METRIC_DEFAULTS = {
    "coreference_pronouns": [
        "he", "she", "it", "they", "them", "him", "her", "his", "hers",
        "its", "their", "theirs", "this", "that", "these", "those", "one",
        "ones",
    ],
    "audio_keywords": [
        "hear", "sound", "sounds", "noise", "audio", "music", "talk",
        "talking", "say", "says", "said", "speak", "speaking", "loud",
    ],
    "yes_tokens": ["yes", "yeah", "yep"],
    "no_tokens": ["no", "nope", "nah"],
}


# Gradient checks

GRADCHECK_DEFAULTS = {
    "eps": 1e-5,
    "tolerance": 1e-4,
    "coordinates_per_parameter": 3,
    "vocab_size": 20,
    "dim": 8,
    "history_turns": 2,
    "modalities": {"audio": 4, "video": 6},
    "topic_count": 3,
    "rng_seed": 0,
}


# Celery Configuration Options
CELERY_BROKER_URL = os.environ.get("CELERY_BROKER_URL", "memory://")
CELERY_RESULT_BACKEND = os.environ.get("CELERY_RESULT_BACKEND", "rpc://")
CELERY_TASK_ALWAYS_EAGER = (
    os.environ.get("CELERY_TASK_ALWAYS_EAGER", "1") == "1"
)
CELERY_TASK_EAGER_PROPAGATES = True
CELERY_TASK_TRACK_STARTED = True
CELERY_TASK_TIME_LIMIT = 60 * 60
