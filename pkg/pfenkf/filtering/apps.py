from django.apps import AppConfig


class FilteringConfig(AppConfig):
    name = 'pfenkf.filtering'
    verbose_name = 'Ensemble Kalman filter'
