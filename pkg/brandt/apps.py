from django.apps import AppConfig


class BrandtConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'brandt'
    verbose_name = 'Brandt matrices and quaternionic modular forms'
