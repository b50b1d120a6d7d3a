from django.apps import AppConfig


class FractureConfig(AppConfig):
    name = 'pfenkf.fracture'
    verbose_name = 'Micromorphic phase-field fracture'
