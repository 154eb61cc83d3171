import logging

from django.core.management.base import CommandError

from core.incidents import report_verification_failure
from stochcool.oracle.services import run_verification
from stochcool.runs.base import RunCommand
from stochcool.runs.presenters import lineas_verificacion
from stochcool.runs.services import escribir_json, resolver_medicion

logger = logging.getLogger(__name__)

EXIT_VERIFICACION_FALLIDA = 1


class Command(RunCommand):
    help = "Contrasta las formas cerradas contra el oráculo de kernel térmico. Sale con 1 si algo falla."
    command = "verify"
    overrides = RunCommand.overrides + ("quick",)

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument("--quick", action="store_true", default=None, help="Grilla reducida.")

    def correr(self, cfg, directorio):
        self.reporte = run_verification(quick=cfg["quick"], meas=resolver_medicion(cfg))
        escribir_json(directorio / "verification.json", self.reporte.as_dict())
        for linea in lineas_verificacion(self.reporte):
            self.stdout.write(linea)
        return ["verification.json"]

    def despues_del_manifest(self, cfg, directorio):
        if self.reporte.passed:
            self.stdout.write(self.style.SUCCESS("Verificación OK."))
            return
        terminos = report_verification_failure(
            self.reporte, command=self.command, quick=cfg["quick"], directorio=str(directorio)
        )
        logger.error("Verificación fallida: %s", terminos)
        self.stdout.write(self.style.ERROR(f"Verificación fallida: {', '.join(terminos)}"))
        raise CommandError("La verificación falló", returncode=EXIT_VERIFICACION_FALLIDA)
