"""
Django settings for the Euler-alignment simulator.

Machine-specific values live in settings_local.py; copy settings_local.template.py to start one.
"""

try:
    from .settings_local import *
except ImportError:
    # development values of settings_local.template.py
    DEBUG = False
    LOG_LEVEL = 'INFO'
    OUTPUT_ROOT = 'output'
    REDIS_URL = 'redis://localhost:6379'
    SECRET_KEY = 'insecure-development-key'
    SWEEP_QUEUE = 'sweeps'
    VACUUM_FLOOR = 1e-12
import os
import sys


# Build paths inside the project like this: os.path.join(BASE_DIR, ...)
BASE_DIR = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))

ALLOWED_HOSTS = ['localhost', '127.0.0.1']


# Application definition

INSTALLED_APPS = [
    'django.contrib.contenttypes',
    'django_dramatiq',
    'alignment',
]

DEFAULT_AUTO_FIELD = 'django.db.models.BigAutoField'


# Simulator defaults shared by every run

ALIGNMENT = {
    'OUTPUT_ROOT': os.path.join(BASE_DIR, OUTPUT_ROOT) if not os.path.isabs(OUTPUT_ROOT) else OUTPUT_ROOT,
    'BLOWUP_FACTOR': 100.,
    'VACUUM_FLOOR': VACUUM_FLOOR,
    'SWEEP_QUEUE': SWEEP_QUEUE,
}


# Task queue for sweep rows; the test suite runs against the in-memory stub broker

TESTING = 'test' in sys.argv[1:2]

DRAMATIQ_BROKER = {
    "BROKER": "dramatiq.brokers.stub.StubBroker" if TESTING else "dramatiq.brokers.redis.RedisBroker",
    "OPTIONS": {} if TESTING else {
        "url": os.getenv('REDIS_URL', REDIS_URL)
    },
    "MIDDLEWARE": [
        "dramatiq.middleware.AgeLimit",
        "dramatiq.middleware.TimeLimit",
        "dramatiq.middleware.Callbacks",
        "dramatiq.middleware.Retries",
        "django_dramatiq.middleware.DbConnectionsMiddleware",
    ]
}

# Database
# https://docs.djangoproject.com/en/4.2/ref/settings/#databases
# nothing is stored; the database only backs django_dramatiq's task table

DATABASES = {
    'default': {
        'ENGINE': 'django.db.backends.sqlite3',
        'NAME': os.path.join(BASE_DIR, 'db.sqlite3'),
    }
}


# Internationalization
# https://docs.djangoproject.com/en/4.2/topics/i18n/

LANGUAGE_CODE = 'en-us'

TIME_ZONE = 'UTC'

USE_TZ = True


LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'simple': {
            'format': '{asctime} {levelname} {name}: {message}',
            'style': '{',
        }
    },
    'handlers': {
        'console': {
            'class': 'logging.StreamHandler',
            'formatter': 'simple',
        }
    },
    'loggers': {
        '': {
            'handlers': ['console'],
            'level': 'DEBUG' if DEBUG else LOG_LEVEL
        }
    }
}
