from django.apps import AppConfig


class SimulationConfig(AppConfig):
    name = 'stochcool.simulation'
    default_auto_field = 'django.db.models.BigAutoField'
