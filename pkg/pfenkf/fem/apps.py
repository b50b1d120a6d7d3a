from django.apps import AppConfig


class FemConfig(AppConfig):
    name = 'pfenkf.fem'
    verbose_name = 'Finite element core'
