from django.apps import AppConfig


class ExperimentsConfig(AppConfig):
    name = 'pfenkf.experiments'
    verbose_name = 'Experiments'
