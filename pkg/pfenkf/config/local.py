import os
from .common import Common, build_logging


class Local(Common):
    DEBUG = True

    INSTALLED_APPS = Common.INSTALLED_APPS

    PFENKF_LOG_LEVEL = os.getenv('PFENKF_LOG_LEVEL', 'DEBUG')
    LOGGING = build_logging(PFENKF_LOG_LEVEL)
