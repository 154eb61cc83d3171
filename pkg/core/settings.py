"""
Django settings for core project.

stochcool no sirve HTTP ni persiste nada: Django aporta los management
commands, la configuración por entorno, el logging y el runner de tests.
"""

from pathlib import Path
import os
from dotenv import load_dotenv
import sentry_sdk
from sentry_sdk.integrations.django import DjangoIntegration

load_dotenv()

SENTRY_DSN = os.getenv('SENTRY_DSN', '')
if SENTRY_DSN:
    sentry_sdk.init(
        dsn=SENTRY_DSN,
        integrations=[DjangoIntegration()],
        environment=os.getenv('SENTRY_ENVIRONMENT', 'development'),
        traces_sample_rate=float(os.getenv('SENTRY_TRACES_SAMPLE_RATE', '0.0')),
        send_default_pii=False,
    )

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent

SECRET_KEY = os.getenv('SECRET_KEY', 'django-insecure-stochcool-sin-http')

DEBUG = os.getenv('DEBUG', 'False') == 'True'

ALLOWED_HOSTS = []


# Application definition

INSTALLED_APPS = [
    'rest_framework',
    'stochcool.trap',
    'stochcool.energy',
    'stochcool.boundary',
    'stochcool.oracle',
    'stochcool.simulation',
    'stochcool.runs',
]

# Los serializers se usan sólo para validar configs, sin request ni usuario.
REST_FRAMEWORK = {
    'DEFAULT_AUTHENTICATION_CLASSES': [],
    'DEFAULT_PERMISSION_CLASSES': [],
    'UNAUTHENTICATED_USER': None,
}

# Sin base de datos: los resultados van a archivos bajo STOCHCOOL_OUTPUT_DIR.
DATABASES = {}


# Internationalization

LANGUAGE_CODE = 'es-cl'

TIME_ZONE = 'UTC'

USE_I18N = True

USE_TZ = True

DEFAULT_AUTO_FIELD = 'django.db.models.BigAutoField'


# Corridas

STOCHCOOL_OUTPUT_DIR = Path(os.getenv('STOCHCOOL_OUTPUT_DIR', str(BASE_DIR / 'runs')))
STOCHCOOL_WORKERS = os.getenv('STOCHCOOL_WORKERS', '1')
STOCHCOOL_LOG_LEVEL = os.getenv('STOCHCOOL_LOG_LEVEL', 'INFO').upper()

LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'simple': {
            'format': '%(asctime)s %(levelname)s %(name)s: %(message)s',
        },
    },
    'handlers': {
        'console': {
            'class': 'logging.StreamHandler',
            'formatter': 'simple',
        },
    },
    'loggers': {
        'stochcool': {
            'handlers': ['console'],
            'level': STOCHCOOL_LOG_LEVEL,
        },
        'core': {
            'handlers': ['console'],
            'level': STOCHCOOL_LOG_LEVEL,
        },
    },
}
