from django.apps import AppConfig


class TrapConfig(AppConfig):
    name = 'stochcool.trap'
    default_auto_field = 'django.db.models.BigAutoField'
