from django.apps import AppConfig


class EnsembleConfig(AppConfig):
    name = 'pfenkf.ensemble'
    verbose_name = 'Stochastic ensemble'
