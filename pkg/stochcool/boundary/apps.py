from django.apps import AppConfig


class BoundaryConfig(AppConfig):
    name = 'stochcool.boundary'
    default_auto_field = 'django.db.models.BigAutoField'
