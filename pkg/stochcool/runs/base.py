import logging

from django.core.management.base import BaseCommand, CommandError

from stochcool.boundary.domain import NoCoolingDomainError
from stochcool.trap.domain import InvalidParameterError

from .services import (
    ConfigError,
    directorio_de_corrida,
    escribir_manifest,
    leer_config,
    validar_config,
)

logger = logging.getLogger(__name__)

EXIT_CONFIG_INVALIDA = 2


class RunCommand(BaseCommand):
    """
    Esqueleto común: lee el config, aplica los overrides de la línea de
    comandos, valida, corre y escribe el manifest.

    Las subclases definen `command` y `correr(cfg, directorio)`, que devuelve
    los nombres de los archivos escritos.
    """
    command = None
    # Opciones de la línea de comandos que pisan el campo homónimo del config.
    overrides = ("output_dir", "run_name", "workers", "seed")

    def add_arguments(self, parser):
        parser.add_argument("config", nargs="?", help="Config JSON (o manifest.json de una corrida anterior).")
        parser.add_argument("--output-dir", dest="output_dir", help="Directorio base de salida.")
        parser.add_argument("--run-name", dest="run_name", help="Nombre fijo del directorio de la corrida.")
        parser.add_argument("--workers", type=int, help="Procesos para los barridos.")
        parser.add_argument("--seed", type=int, help="Semilla base.")

    def _cargar(self, options):
        data = leer_config(options["config"]) if options.get("config") else {}
        for clave in self.overrides:
            if options.get(clave) is not None:
                data[clave] = options[clave]
        return validar_config(self.command, data)

    def handle(self, *args, **options):
        try:
            cfg = self._cargar(options)
            directorio = directorio_de_corrida(self.command, cfg)
            logger.info("Corrida %s en %s", self.command, directorio)
            archivos = self.correr(cfg, directorio)
        except ConfigError as exc:
            raise CommandError(f"Config inválida: {exc}", returncode=EXIT_CONFIG_INVALIDA) from exc
        except (InvalidParameterError, NoCoolingDomainError) as exc:
            raise CommandError(f"Parámetros fuera de dominio: {exc}", returncode=EXIT_CONFIG_INVALIDA) from exc

        escribir_manifest(directorio, self.command, cfg, list(archivos) + ["manifest.json"])
        self.stdout.write(self.style.SUCCESS(f"Resultados en {directorio}"))
        self.despues_del_manifest(cfg, directorio)

    def correr(self, cfg, directorio):
        raise NotImplementedError

    def despues_del_manifest(self, cfg, directorio):
        """Gancho para comandos cuyo código de salida depende del resultado."""
