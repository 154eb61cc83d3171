from unittest.mock import patch

from django.conf import settings
from django.test import SimpleTestCase, override_settings

from core.incidents import report_verification_failure
from core.utils import formatear_numero, map_en_orden, trabajadores_por_defecto
from stochcool.oracle.domain import TermCheck, VerificationReport


class MapEnOrdenTests(SimpleTestCase):
    def test_paralelo_respeta_el_orden(self):
        items = list(range(-10, 10))
        self.assertEqual(map_en_orden(abs, items, workers=3), [abs(x) for x in items])

    def test_un_item_no_abre_procesos(self):
        with patch("core.utils.ProcessPoolExecutor") as pool:
            self.assertEqual(map_en_orden(abs, [-4], workers=8), [4])
        pool.assert_not_called()

    @override_settings(STOCHCOOL_WORKERS="1")
    def test_none_usa_el_default_del_entorno(self):
        with patch("core.utils.ProcessPoolExecutor") as pool:
            self.assertEqual(map_en_orden(abs, [-1, 2, -3], workers=None), [1, 2, 3])
        pool.assert_not_called()


class TrabajadoresPorDefectoTests(SimpleTestCase):
    @override_settings(STOCHCOOL_WORKERS="4")
    def test_lee_el_entorno(self):
        self.assertEqual(trabajadores_por_defecto(), 4)

    @override_settings(STOCHCOOL_WORKERS="muchos")
    def test_valor_invalido_vuelve_a_uno(self):
        with self.assertLogs("core.utils", level="WARNING"):
            self.assertEqual(trabajadores_por_defecto(), 1)


class FormatearNumeroTests(SimpleTestCase):
    def test_diecisiete_cifras(self):
        self.assertEqual(formatear_numero(0.1), "1.0000000000000001e-01")
        self.assertEqual(formatear_numero(-2), "-2.0000000000000000e+00")


class ReportVerificationFailureTests(SimpleTestCase):
    def _reporte(self):
        return VerificationReport(checks=(
            TermCheck("parallel", "dV_par", 1e-12, 1e-8, True),
            TermCheck("parallel", "dT_par_fluct", 1e-2, 1e-8, False, {"s": 1.0}),
            TermCheck("perp", "term_3", 1e-3, 1e-6, False),
        ))

    @patch("core.incidents.sentry_sdk")
    def test_etiqueta_y_fingerprint_por_termino(self, sentry):
        terminos = report_verification_failure(self._reporte(), command="verify")

        self.assertEqual(terminos, ["parallel/dT_par_fluct", "perp/term_3"])
        scope = sentry.push_scope.return_value.__enter__.return_value
        scope.set_tag.assert_any_call("event_type", "verification_failure")
        self.assertEqual(scope.fingerprint, ["verification-failure", "parallel/dT_par_fluct", "perp/term_3"])
        contexto = scope.set_context.call_args.args[1]
        self.assertEqual(contexto["command"], "verify")
        self.assertEqual(len(contexto["failures"]), 2)
        sentry.capture_message.assert_called_once()
        self.assertEqual(sentry.capture_message.call_args.kwargs["level"], "error")


class SettingsTests(SimpleTestCase):
    def test_sin_base_de_datos_ni_apps_que_la_requieran(self):
        self.assertEqual(settings.DATABASES, {})
        self.assertEqual([app for app in settings.INSTALLED_APPS if app.startswith("django.contrib.")], [])
        self.assertIn("rest_framework", settings.INSTALLED_APPS)
