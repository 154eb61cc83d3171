import logging
from concurrent.futures import ProcessPoolExecutor

from django.conf import settings

logger = logging.getLogger(__name__)


def trabajadores_por_defecto():
    """STOCHCOOL_WORKERS del entorno; 1 si no está o no es un entero válido."""
    valor = getattr(settings, "STOCHCOOL_WORKERS", 1)
    try:
        return max(1, int(valor))
    except (TypeError, ValueError):
        logger.warning("STOCHCOOL_WORKERS inválido (%r), se usa 1", valor)
        return 1


def map_en_orden(func, items, workers=1):
    """
    list(map(func, items)) repartido en `workers` procesos.

    El resultado queda en el orden de `items` sin importar qué proceso
    termine primero, así que para funciones puras es idéntico al serial.
    func debe ser picklable (definida a nivel de módulo).
    """
    items = list(items)
    if workers is None:
        workers = trabajadores_por_defecto()
    if workers <= 1 or len(items) <= 1:
        return [func(item) for item in items]
    with ProcessPoolExecutor(max_workers=min(workers, len(items))) as pool:
        return list(pool.map(func, items))


def formatear_numero(valor):
    """Formato fijo de los CSV: 17 cifras significativas, reproducible byte a byte."""
    return format(float(valor), ".16e")
