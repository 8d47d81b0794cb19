"""
Django settings for sg_mimo.

Everything is read from the environment (or a ``.env`` file next to
manage.py) through django-environ. The SG_MIMO_* values are the library
defaults; explicit function arguments always take precedence.
"""

import os
from pathlib import Path

import environ

BASE_DIR = Path(__file__).resolve().parent.parent

env = environ.Env(
    DEBUG=(bool, False),
    SG_MIMO_THREADS=(int, os.cpu_count() or 1),
    SG_MIMO_QUAD_REL_TOL=(float, 1e-8),
    SG_MIMO_QUAD_ABS_TOL=(float, 1e-12),
    SG_MIMO_QUAD_LIMIT=(int, 2000),
    SG_MIMO_MAX_JET_ORDER=(int, 32),
    SG_MIMO_EXACT_ASEP_MAX_MO=(int, 4),
    SG_MIMO_TRUNCATION_TOL=(float, 1e-3),
    SG_MIMO_LOG_LEVEL=(str, "INFO"),
)
environ.Env.read_env(os.path.join(BASE_DIR, ".env"))

SECRET_KEY = env("SECRET_KEY", default="sg-mimo-local-only")
DEBUG = env("DEBUG")
ALLOWED_HOSTS = env.list("ALLOWED_HOSTS", default=[])

INSTALLED_APPS = [
    "django.contrib.contenttypes",
    "cellular",
]

# The analytics keep no state; the database only satisfies Django's checks.
DATABASES = {
    "default": env.db("DATABASE_URL", default=f"sqlite:///{BASE_DIR / 'db.sqlite3'}"),
}
DEFAULT_AUTO_FIELD = "django.db.models.BigAutoField"
USE_TZ = True
TIME_ZONE = "UTC"

# --- Numerics ---
SG_MIMO_THREADS = env("SG_MIMO_THREADS")
SG_MIMO_QUAD_REL_TOL = env("SG_MIMO_QUAD_REL_TOL")
SG_MIMO_QUAD_ABS_TOL = env("SG_MIMO_QUAD_ABS_TOL")
SG_MIMO_QUAD_LIMIT = env("SG_MIMO_QUAD_LIMIT")
SG_MIMO_MAX_JET_ORDER = env("SG_MIMO_MAX_JET_ORDER")
SG_MIMO_EXACT_ASEP_MAX_MO = env("SG_MIMO_EXACT_ASEP_MAX_MO")
SG_MIMO_TRUNCATION_TOL = env("SG_MIMO_TRUNCATION_TOL")

# --- Celery ---
CELERY_BROKER_URL = env("CELERY_BROKER_URL", default="")
CELERY_RESULT_BACKEND = env("CELERY_RESULT_BACKEND", default="")
# without a broker, tasks run inline
CELERY_TASK_ALWAYS_EAGER = env.bool("CELERY_TASK_ALWAYS_EAGER", default=not CELERY_BROKER_URL)
CELERY_TASK_EAGER_PROPAGATES = True
CELERY_ACCEPT_CONTENT = ["json"]
CELERY_TASK_SERIALIZER = "json"
CELERY_RESULT_SERIALIZER = "json"

# --- Logging ---
LOGGING = {
    "version": 1,
    "disable_existing_loggers": False,
    "formatters": {
        "verbose": {
            "format": "{asctime} {levelname} {name} {message}",
            "style": "{",
        },
    },
    "handlers": {
        "console": {
            "class": "logging.StreamHandler",
            "formatter": "verbose",
        },
    },
    "loggers": {
        "cellular": {
            "handlers": ["console"],
            "level": env("SG_MIMO_LOG_LEVEL"),
            "propagate": False,
        },
        "celery": {
            "handlers": ["console"],
            "level": "INFO",
        },
    },
}
