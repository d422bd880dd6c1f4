import environ
import os

env = environ.Env()

# Project root: 3 levels above this settings file
root = environ.Path(__file__) - 3
BASE_DIR = root()

# Try loading .env from BASE_DIR first
base_env_path = os.path.join(BASE_DIR, ".env")
fallback_env_path = os.path.join(BASE_DIR, "config", "settings", ".env")

if os.path.exists(base_env_path):
    env.read_env(base_env_path)
elif os.path.exists(fallback_env_path):
    env.read_env(fallback_env_path)

# No web surface is served; the key only satisfies Django's startup checks.
SECRET_KEY = env('SECRET_KEY', default='dprl-insecure-development-key')

DEBUG = env.bool('DEBUG', default=False)

ALLOWED_HOSTS = []

# Application definition

DJANGO_APPS = [
    'django.contrib.contenttypes',
    'django.contrib.auth',
]

THIRD_PARTY_APPS = [
    'rest_framework',
]

LOCAL_APPS = [
    'dprl.environments',
    'dprl.esd',
    'dprl.policy',
    'dprl.training',
    'dprl.evaluation',
    'dprl.experiments',
]

INSTALLED_APPS = DJANGO_APPS + THIRD_PARTY_APPS + LOCAL_APPS

DATABASES = {
    'default': {
        'ENGINE': 'django.db.backends.sqlite3',
        'NAME': root('db.sqlite3'),
    }
}

DEFAULT_AUTO_FIELD = 'django.db.models.BigAutoField'

TIME_ZONE = 'UTC'
USE_TZ = True

# Experiment harness
# --------------------------------------------------------------------------
DPRL_OUTPUT_DIR = env('DPRL_OUTPUT_DIR', default=root('runs'))
DPRL_LOG_LEVEL = env('DPRL_LOG_LEVEL', default='INFO')

# Logging
# --------------------------------------------------------------------------
LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'verbose': {
            'format': '{levelname} {asctime} {name} {message}',
            'style': '{',
        },
    },
    'handlers': {
        'console': {
            'class': 'logging.StreamHandler',
            'formatter': 'verbose',
        },
    },
    'loggers': {
        'dprl': {
            'handlers': ['console'],
            'level': DPRL_LOG_LEVEL,
            'propagate': False,
        },
        'celery': {
            'handlers': ['console'],
            'level': 'WARNING',
        },
    },
}

# Celery: experiment cells are dispatched as tasks. Eager by default so a
# single process runs everything; point the broker at Redis and start
# `celery -A config worker` to fan cells out.
CELERY_BROKER_URL = env('CELERY_BROKER_URL', default='memory://')
CELERY_RESULT_BACKEND = env('CELERY_RESULT_BACKEND', default='cache+memory://')
CELERY_TASK_ALWAYS_EAGER = env.bool('CELERY_TASK_ALWAYS_EAGER', default=True)
CELERY_TASK_EAGER_PROPAGATES = True
CELERY_ACCEPT_CONTENT = ['json']  # Accepted content types
CELERY_TASK_SERIALIZER = 'json'
CELERY_RESULT_SERIALIZER = 'json'
CELERY_TIMEZONE = TIME_ZONE
