"""
Configuración y salida de las corridas.

Una corrida = un config JSON validado + un directorio propio con los
archivos de resultado y un manifest.json. El directorio se nombra por el
hash del config, así que repetir la misma corrida escribe los mismos bytes
en el mismo lugar.
"""
import csv
import hashlib
import json
import logging
import math
from pathlib import Path

from django.conf import settings
from packaging.version import InvalidVersion, Version

import stochcool
from core.utils import formatear_numero
from stochcool.energy.domain import MeasurementSetting
from stochcool.trap.domain import BeamGeometry, ScaledGeometry, TrapEnsembleParams
from stochcool.trap.services import beam_from_scaled, natural_scales

from .serializers import SERIALIZADORES

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1
PAQUETE = "stochcool"

# Campos que no cambian el resultado y por eso no entran en el hash.
_FUERA_DE_LA_HUELLA = ("workers", "output_dir")


class ConfigError(ValueError):
    def __init__(self, field, message):
        self.field = field
        super().__init__(f"{field}: {message}")


# ── Lectura y validación ─────────────────────────────────────────────────────

def verificar_version(version):
    """Advierte si el manifest viene de otra versión mayor del paquete."""
    try:
        leida, actual = Version(str(version)), Version(stochcool.__version__)
    except InvalidVersion as exc:
        raise ConfigError("version", f"versión inválida {version!r}") from exc
    if leida.major != actual.major:
        logger.warning(
            "El manifest es de %s %s y esta es la %s; los resultados pueden no ser comparables",
            PAQUETE, leida, actual,
        )
    return leida


def leer_config(path):
    """
    Config desde un archivo JSON. Acepta también un manifest.json de una
    corrida anterior: en ese caso se usa su `config`.
    """
    path = Path(path)
    if not path.exists():
        raise ConfigError("config", f"archivo no encontrado: {path}")
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError("config", f"JSON inválido en {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config", "el config debe ser un objeto JSON")
    if "schema_version" in data and "config" in data:
        verificar_version(data.get("version", "0"))
        data = data["config"]
    return data


def validar_config(command, data):
    serializer = SERIALIZADORES[command](data=data)
    if not serializer.is_valid():
        campo, errores = next(iter(serializer.errors.items()))
        mensaje = errores[0] if isinstance(errores, list) and errores else errores
        raise ConfigError(campo, str(mensaje))
    return dict(serializer.validated_data)


def dump_config(cfg):
    """Forma canónica: sin nulos y con claves ordenadas. dump(validar(dump(c))) == dump(c)."""
    return {clave: cfg[clave] for clave in sorted(cfg) if cfg[clave] is not None}


def huella_config(cfg):
    canonico = {k: v for k, v in dump_config(cfg).items() if k not in _FUERA_DE_LA_HUELLA}
    texto = json.dumps(canonico, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(texto.encode("utf-8")).hexdigest()[:12]


# ── Traducción a objetos del dominio ─────────────────────────────────────────

def resolver_params(cfg, n_atoms=None):
    n_atoms = n_atoms if n_atoms is not None else cfg["n_atoms"]
    if cfg["units"] == "si":
        return TrapEnsembleParams(
            omega=cfg["omega"], mass=cfg["mass"], temperature=cfg["temperature"], n_atoms=n_atoms, units="si"
        )
    if cfg.get("l_th_sq") is not None:
        return TrapEnsembleParams.from_l_th_sq(cfg["l_th_sq"], n_atoms)
    if cfg.get("t_over_t0") is not None:
        return TrapEnsembleParams.from_t_over_t0(cfg["t_over_t0"], n_atoms)
    return TrapEnsembleParams.from_reduced_temperature(cfg["reduced_temperature"], n_atoms)


def resolver_haz(cfg, params):
    if cfg["units"] == "si":
        return BeamGeometry(r0=cfg["r0"], x0=cfg.get("x0") or 0.0, y0=cfg.get("y0") or 0.0)
    return beam_from_scaled(ScaledGeometry(s=cfg["s"], d=cfg.get("d") or 0.0), natural_scales(params))


# Trampa con ω = m = 1: la que usan las grillas del oráculo.
_DP0_TRAMPA = math.sqrt(0.5)


def resolver_medicion(cfg, params=None):
    """
    En units="trap" el `sigma` del config es σ/dp0; en units="si" va en
    kg·m/s. MeasurementSetting siempre recibe σ en momento.
    """
    if cfg["sigma_mode"] != "explicit":
        return MeasurementSetting.optimal()
    if cfg["units"] == "si":
        return MeasurementSetting.explicit(cfg["sigma"])
    dp0 = natural_scales(params).dp0 if params is not None else _DP0_TRAMPA
    return MeasurementSetting.explicit(cfg["sigma"] * dp0)


def rango(minimo, maximo, puntos):
    if puntos == 1:
        return [float(minimo)]
    paso = (maximo - minimo) / (puntos - 1)
    return [minimo + k * paso for k in range(puntos)]


def rango_geometrico(minimo, maximo, puntos):
    if puntos == 1:
        return [float(minimo)]
    a, b = math.log(minimo), math.log(maximo)
    return [math.exp(a + k * (b - a) / (puntos - 1)) for k in range(puntos)]


# ── Escritura ────────────────────────────────────────────────────────────────

def directorio_de_corrida(command, cfg):
    base = Path(cfg.get("output_dir") or settings.STOCHCOOL_OUTPUT_DIR)
    nombre = cfg.get("run_name") or f"{command}-{huella_config(cfg)}"
    directorio = base / nombre
    directorio.mkdir(parents=True, exist_ok=True)
    return directorio


def escribir_json(path, data):
    Path(path).write_text(json.dumps(data, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _celda(valor):
    if valor is None:
        return ""
    if isinstance(valor, float):
        return formatear_numero(valor)
    return str(valor)


def escribir_csv(path, columnas, filas):
    """Escribe sólo el encabezado si no hay filas."""
    with open(path, "w", encoding="utf-8", newline="") as archivo:
        writer = csv.writer(archivo, lineterminator="\n")
        writer.writerow(columnas)
        for fila in filas:
            writer.writerow([_celda(fila[c]) for c in columnas])


def escribir_manifest(directorio, command, cfg, archivos):
    manifest = {
        "schema_version": SCHEMA_VERSION,
        "package": PAQUETE,
        "version": stochcool.__version__,
        "command": command,
        "seed": cfg.get("seed", 0),
        "config": {k: v for k, v in dump_config(cfg).items() if k not in _FUERA_DE_LA_HUELLA},
        "files": sorted(archivos),
    }
    escribir_json(Path(directorio) / "manifest.json", manifest)
    return manifest
