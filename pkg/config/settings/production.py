from .base import * # NOQA

DEBUG = False

# Worker-pool mode: cells go through the broker to `celery -A config worker`.
CELERY_TASK_ALWAYS_EAGER = env.bool('CELERY_TASK_ALWAYS_EAGER', default=False)  # NOQA
CELERY_BROKER_URL = env('CELERY_BROKER_URL', default='redis://localhost:6379/0')  # NOQA
CELERY_RESULT_BACKEND = env('CELERY_RESULT_BACKEND', default='redis://localhost:6379/0')  # NOQA
