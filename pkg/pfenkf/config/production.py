import os
from .common import Common


class Production(Common):
    INSTALLED_APPS = Common.INSTALLED_APPS
    SECRET_KEY = os.getenv('DJANGO_SECRET_KEY')

    # One experiment per container
    PFENKF_PARALLEL = int(os.getenv('PFENKF_PARALLEL', os.cpu_count() or 1))
