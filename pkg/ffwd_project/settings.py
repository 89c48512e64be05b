"""
Django settings for ffwd_project project.

The project has no web surface: Django provides the app registry, the
management-command CLI (``python manage.py <stage>``), the test runner and
the Celery wiring. Every tunable below can be overridden from the
environment or a ``.env`` file through python-decouple.
"""

from pathlib import Path
from decouple import config
import os

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent

SECRET_KEY = config("SECRET_KEY", default="unsafe-key")
DEBUG = config("DEBUG", default=True, cast=bool)

ALLOWED_HOSTS = []


# Application definition

INSTALLED_APPS = [
    "footage",
    "profiles",
    "sampling",
    "smoothing",
    "gapfill",
    "metrics",
    "synth",
    "pipeline",
]

# No database.
DATABASES = {}

DEFAULT_AUTO_FIELD = "django.db.models.BigAutoField"

USE_TZ = True
TIME_ZONE = "UTC"


# Pipeline defaults (all overridable per run through command flags)

FFWD_DEFAULT_SPEEDUP = config("FFWD_DEFAULT_SPEEDUP", default=10.0, cast=float)
FFWD_DEFAULT_SPF = config("FFWD_DEFAULT_SPF", default=2, cast=int)
FFWD_DEFAULT_LEVELS = config("FFWD_DEFAULT_LEVELS", default=2, cast=int)
FFWD_LAMBDA_SCALE = config("FFWD_LAMBDA_SCALE", default=0.01, cast=float)
FFWD_METRICS_WINDOW = config("FFWD_METRICS_WINDOW", default=4, cast=int)

# Worker cap for per-segment fan-out; FFWD_THREADS beats --threads.
FFWD_THREADS = config("FFWD_THREADS", default=None, cast=lambda v: int(v) if v else None)
FFWD_DEFAULT_THREADS = os.cpu_count() or 1


# Logging

FFWD_LOG_LEVEL = config("FFWD_LOG_LEVEL", default="INFO").upper()

LOGGING = {
    "version": 1,
    "disable_existing_loggers": False,
    "formatters": {
        "plain": {"format": "%(asctime)s %(levelname)s %(name)s: %(message)s"},
    },
    "handlers": {
        "console": {"class": "logging.StreamHandler", "formatter": "plain"},
    },
    "root": {"handlers": ["console"], "level": FFWD_LOG_LEVEL},
}


# Celery

CELERY_BROKER_URL = config("CELERY_BROKER_URL", "redis://localhost:6379/0")
CELERY_RESULT_BACKEND = config("CELERY_RESULT_BACKEND", CELERY_BROKER_URL)

# Safety & behavior
CELERY_TASK_ACKS_LATE = True
CELERY_WORKER_PREFETCH_MULTIPLIER = 1
CELERY_TASK_TIME_LIMIT = 60 * 30  # 30 minutes

# Optional: run tasks locally (synchronous) for dev/debug
# Set CELERY_TASK_ALWAYS_EAGER=true in your env to enable
CELERY_TASK_ALWAYS_EAGER = config("CELERY_TASK_ALWAYS_EAGER", "false").lower() == "true"
CELERY_TASK_EAGER_PROPAGATES = True

# Queue names
CELERY_PIPELINE_QUEUE = config("CELERY_PIPELINE_QUEUE", "pipeline")
