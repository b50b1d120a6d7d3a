import os
from os.path import join
from configurations import Configuration
BASE_DIR = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))


def build_logging(level):
    return {
        'version': 1,
        'disable_existing_loggers': False,
        'formatters': {
            'verbose': {
                'format': '%(levelname)s %(asctime)s %(module)s %(process)d %(thread)d %(message)s'
            },
            'simple': {
                'format': '%(levelname)s %(name)s %(message)s'
            },
        },
        'handlers': {
            'console': {
                'level': 'DEBUG',
                'class': 'logging.StreamHandler',
                'formatter': 'simple'
            },
        },
        'loggers': {
            'django': {
                'handlers': ['console'],
                'level': 'WARNING',
                'propagate': True,
            },
            'pfenkf': {
                'handlers': ['console'],
                'level': level,
                'propagate': False,
            },
        }
    }


class Common(Configuration):

    INSTALLED_APPS = (
        # Your apps
        'pfenkf.fem',
        'pfenkf.fracture',
        'pfenkf.ensemble',
        'pfenkf.observations',
        'pfenkf.filtering',
        'pfenkf.experiments',
    )

    SECRET_KEY = os.getenv('DJANGO_SECRET_KEY', 'local')

    # The experiments never touch a database.
    DATABASES = {}

    # General
    TIME_ZONE = 'UTC'
    LANGUAGE_CODE = 'en-us'
    USE_I18N = False
    USE_TZ = True

    # DEBUG stays off unless DJANGO_DEBUG turns it on
    # https://docs.djangoproject.com/en/dev/ref/settings/#debug
    DEBUG = os.getenv('DJANGO_DEBUG', 'no').lower() in ('true', '1', 'yes')

    # Experiments
    PFENKF_PARALLEL = int(os.getenv('PFENKF_PARALLEL', 1))
    PFENKF_OUTPUT_ROOT = os.getenv('PFENKF_OUTPUT_ROOT', join(os.path.dirname(BASE_DIR), 'runs'))
    PFENKF_PRESET_DIR = os.getenv('PFENKF_PRESET_DIR', join(BASE_DIR, 'experiments', 'presets'))

    # Logging
    PFENKF_LOG_LEVEL = os.getenv('PFENKF_LOG_LEVEL', 'INFO')
    LOGGING = build_logging(PFENKF_LOG_LEVEL)
