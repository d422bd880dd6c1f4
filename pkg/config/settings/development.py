from .base import * # NOQA

DEBUG = True

LOGGING['loggers']['dprl']['level'] = env('DPRL_LOG_LEVEL', default='DEBUG')  # NOQA
