from django.apps import AppConfig


class ObservationsConfig(AppConfig):
    name = 'pfenkf.observations'
    verbose_name = 'Observations and data model'
