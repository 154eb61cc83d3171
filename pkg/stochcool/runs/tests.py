import csv
import json
import tempfile
from io import StringIO
from pathlib import Path
from unittest.mock import patch

from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase

import stochcool
from stochcool.boundary.services import boundary_curve
from stochcool.energy.domain import MeasurementSetting
from stochcool.energy.services import delta_E_total
from stochcool.oracle.domain import TermCheck, VerificationReport
from stochcool.runs.services import ConfigError, dump_config, huella_config, resolver_medicion, validar_config
from stochcool.trap.domain import ScaledGeometry, TrapEnsembleParams
from stochcool.trap.services import natural_scales

BASE_TRAP = {"units": "trap", "l_th_sq": 200.0, "n_atoms": 100, "s": 2.0, "d": 1.0}


class _ConDirectorio(SimpleTestCase):
    def setUp(self):
        self._tmp = tempfile.TemporaryDirectory()
        self.tmp = Path(self._tmp.name)

    def tearDown(self):
        self._tmp.cleanup()

    def _config(self, data, nombre="config.json"):
        path = self.tmp / nombre
        path.write_text(json.dumps(data), encoding="utf-8")
        return str(path)

    def _correr(self, command, data, **opciones):
        out = StringIO()
        call_command(command, self._config(data), output_dir=str(self.tmp / "out"), stdout=out, **opciones)
        return out.getvalue()

    def _directorio(self, command):
        (directorio,) = [p for p in (self.tmp / "out").iterdir() if p.name.startswith(command)]
        return directorio

    def _filas_csv(self, path):
        with open(path, encoding="utf-8") as archivo:
            return list(csv.reader(archivo))

    def _bytes_por_procesos(self, command, config, archivo):
        salidas = []
        for workers in (1, 4, 16):
            destino = self.tmp / f"w{workers}"
            call_command(command, self._config(config), output_dir=str(destino), workers=workers, stdout=StringIO())
            (directorio,) = list(destino.iterdir())
            salidas.append((directorio.name, (directorio / archivo).read_bytes(), (directorio / "manifest.json").read_bytes()))
        return salidas


class EnergyCommandTests(_ConDirectorio):
    def test_escribe_presupuesto_y_manifest(self):
        out = self._correr("energy", BASE_TRAP)
        directorio = self._directorio("energy")

        esperado = delta_E_total(
            ScaledGeometry(s=2.0, d=1.0), TrapEnsembleParams.from_l_th_sq(200.0, 100), MeasurementSetting.optimal()
        )
        budget = json.loads((directorio / "budget.json").read_text(encoding="utf-8"))
        self.assertAlmostEqual(budget["dE_total"], esperado.dE_total, places=9)
        self.assertIn("ΔE", out)

        manifest = json.loads((directorio / "manifest.json").read_text(encoding="utf-8"))
        self.assertEqual(manifest["schema_version"], 1)
        self.assertEqual(manifest["version"], stochcool.__version__)
        self.assertEqual(manifest["files"], ["budget.json", "manifest.json"])
        self.assertEqual(set(manifest), {"schema_version", "package", "version", "command", "seed", "config", "files"})

    def test_directorio_por_hash_y_bytes_estables(self):
        self._correr("energy", BASE_TRAP)
        directorio = self._directorio("energy")
        primero = (directorio / "manifest.json").read_bytes()
        self._correr("energy", BASE_TRAP, workers=3)
        self.assertEqual(self._directorio("energy"), directorio)
        self.assertEqual((directorio / "manifest.json").read_bytes(), primero)
        self.assertEqual(directorio.name, "energy-" + huella_config(validar_config("energy", BASE_TRAP)))

    def test_run_name_fija_el_directorio(self):
        self._correr("energy", BASE_TRAP, run_name="fija")
        self.assertTrue((self.tmp / "out" / "fija" / "budget.json").exists())

    def test_unidades_si(self):
        config = {
            "units": "si", "omega": 2 * 3.141592653589793 * 100.0, "mass": 1.443e-25,
            "temperature": 1e-6, "n_atoms": 1000, "r0": 2e-5, "x0": 1e-5,
        }
        self._correr("energy", config)
        budget = json.loads((self._directorio("energy") / "budget.json").read_text(encoding="utf-8"))
        self.assertGreater(budget["l_th_sq"], 100.0)
        self.assertGreater(budget["s"], 0.0)

    def test_manifest_como_config(self):
        self._correr("energy", BASE_TRAP)
        directorio = self._directorio("energy")
        out = StringIO()
        call_command("energy", str(directorio / "manifest.json"), output_dir=str(self.tmp / "out"), stdout=out)
        self.assertIn(str(directorio), out.getvalue())

    def test_manifest_de_otra_version_mayor_advierte(self):
        manifest = {"schema_version": 1, "version": "99.0.0", "config": BASE_TRAP}
        with self.assertLogs("stochcool.runs.services", level="WARNING"):
            self._correr("energy", manifest)

    def test_sigma_explicito_en_unidades_de_trampa_es_sigma_sobre_dp0(self):
        config = {
            "units": "trap", "l_th_sq": 200.0, "n_atoms": 3, "s": 1.0, "d": 0.0,
            "sigma_mode": "explicit", "sigma": 1.0,
        }
        self._correr("energy", config)
        budget = json.loads((self._directorio("energy") / "budget.json").read_text(encoding="utf-8"))
        self.assertAlmostEqual(budget["sigma_over_dp0"], 1.0, places=12)
        # ⟨N_w⟩ = 3·1/(1 + 2) = 1
        self.assertAlmostEqual(budget["dV_par"], 0.25, places=12)


class ConfigInvalidaTests(_ConDirectorio):
    def _assert_exit_2(self, data, campo):
        with self.assertRaises(CommandError) as ctx:
            self._correr("energy", data)
        self.assertEqual(ctx.exception.returncode, 2)
        self.assertIn(campo, str(ctx.exception))

    def test_mezcla_de_unidades(self):
        self._assert_exit_2(dict(BASE_TRAP, r0=1e-5), "r0")

    def test_sin_temperatura(self):
        data = dict(BASE_TRAP)
        del data["l_th_sq"]
        self._assert_exit_2(data, "l_th_sq")

    def test_dos_temperaturas(self):
        self._assert_exit_2(dict(BASE_TRAP, t_over_t0=10.0), "l_th_sq")

    def test_sigma_explicito_sin_valor(self):
        self._assert_exit_2(dict(BASE_TRAP, sigma_mode="explicit"), "sigma")

    def test_temperatura_fuera_de_dominio(self):
        self._assert_exit_2(dict(BASE_TRAP, l_th_sq=0.5), "l_th_sq")

    def test_ceros_los_rechaza_el_serializador(self):
        for campo in ("s", "l_th_sq"):
            with self.subTest(campo=campo):
                with self.assertRaises(ConfigError) as ctx:
                    validar_config("energy", dict(BASE_TRAP, **{campo: 0.0}))
                self.assertEqual(ctx.exception.field, campo)
                self._assert_exit_2(dict(BASE_TRAP, **{campo: 0.0}), campo)
        self.assertEqual(validar_config("energy", dict(BASE_TRAP, d=0.0))["d"], 0.0)


    def test_archivo_inexistente(self):
        with self.assertRaises(CommandError) as ctx:
            call_command("energy", str(self.tmp / "no-existe.json"), stdout=StringIO())
        self.assertEqual(ctx.exception.returncode, 2)

    def test_json_roto(self):
        path = self.tmp / "roto.json"
        path.write_text("{", encoding="utf-8")
        with self.assertRaises(CommandError) as ctx:
            call_command("energy", str(path), stdout=StringIO())
        self.assertEqual(ctx.exception.returncode, 2)


class ResolverMedicionTests(SimpleTestCase):
    def test_trap_multiplica_por_dp0(self):
        cfg = validar_config("energy", dict(BASE_TRAP, sigma_mode="explicit", sigma=2.0))
        params = TrapEnsembleParams.from_l_th_sq(200.0, 100)
        meas = resolver_medicion(cfg, params)
        self.assertAlmostEqual(meas.resolve(1.0, natural_scales(params)), 2.0, places=14)
        self.assertAlmostEqual(resolver_medicion(cfg).sigma, meas.sigma, places=15)

    def test_si_queda_en_momento(self):
        cfg = {"units": "si", "sigma_mode": "explicit", "sigma": 3e-28}
        self.assertEqual(resolver_medicion(cfg).sigma, 3e-28)

    def test_optimo_ignora_sigma(self):
        self.assertEqual(resolver_medicion(validar_config("energy", BASE_TRAP)).mode, "optimal")


class DumpConfigTests(SimpleTestCase):

    def test_ida_y_vuelta_idempotente(self):
        for command, data in (
            ("energy", BASE_TRAP),
            ("simulate", dict(BASE_TRAP, replicas=5, steps=3, inter_step_phase=0.5)),
            ("boundary", {"l_th_sq": 200.0, "n_atoms": 10, "modes": ["total", "asymptotic"]}),
        ):
            with self.subTest(command=command):
                primero = dump_config(validar_config(command, data))
                self.assertEqual(dump_config(validar_config(command, primero)), primero)

    def test_workers_y_output_dir_no_cambian_la_huella(self):
        a = validar_config("energy", BASE_TRAP)
        b = validar_config("energy", dict(BASE_TRAP, workers=4, output_dir="/tmp/otra"))
        self.assertEqual(huella_config(a), huella_config(b))
        self.assertNotEqual(huella_config(a), huella_config(validar_config("energy", dict(BASE_TRAP, seed=1))))


class BoundaryCommandTests(_ConDirectorio):
    def test_un_csv_por_modo_y_n(self):
        config = {
            "l_th_sq": 200.0, "n_atoms": 100, "modes": ["total", "longitudinal_only"],
            "s_min": 1.5, "s_max": 3.0, "s_points": 4, "n_atoms_list": [100, 10000],
        }
        self._correr("boundary", config)
        directorio = self._directorio("boundary")
        nombres = sorted(p.name for p in directorio.glob("boundary_*.csv"))
        self.assertEqual(nombres, [
            "boundary_longitudinal_only_N100.csv", "boundary_longitudinal_only_N10000.csv",
            "boundary_total_N100.csv", "boundary_total_N10000.csv",
        ])
        filas = self._filas_csv(directorio / "boundary_total_N100.csv")
        self.assertEqual(filas[0], ["s", "d", "mode", "N", "l_th_sq", "sigma_mode"])
        self.assertEqual(filas[1][0], format(1.5, ".16e"))

    def test_curva_vacia_deja_solo_encabezado(self):
        config = {"l_th_sq": 200.0, "n_atoms": 100, "s_min": 0.1, "s_max": 0.3, "s_points": 3}
        with self.assertLogs("stochcool.boundary.services", level="WARNING"):
            out = self._correr("boundary", config)
        filas = self._filas_csv(self._directorio("boundary") / "boundary_total_N100.csv")
        self.assertEqual(len(filas), 1)
        self.assertIn("sin región de enfriamiento", out)


    def test_t_sobre_t0_se_fija_por_cada_n(self):
        config = {
            "t_over_t0": 10.0, "n_atoms": 10 ** 6, "modes": ["total"],
            "s_min": 1.5, "s_max": 4.5, "s_points": 3, "n_atoms_list": [1, 10, 100, 10 ** 6],
        }
        self._correr("boundary", config)
        directorio = self._directorio("boundary")
        l_th_sq = {}
        for n in config["n_atoms_list"]:
            params = TrapEnsembleParams.from_t_over_t0(10.0, n)
            esperada = boundary_curve([1.5, 3.0, 4.5], "total", params, MeasurementSetting.optimal())
            filas = self._filas_csv(directorio / f"boundary_total_N{n}.csv")[1:]
            with self.subTest(n=n):
                self.assertEqual([(float(f[0]), float(f[1])) for f in filas], list(esperada.samples))
                for fila in filas:
                    self.assertEqual(float(fila[4]), natural_scales(params).l_th_sq)
            l_th_sq[n] = natural_scales(params).l_th_sq
        self.assertLess(l_th_sq[1], l_th_sq[10 ** 6] / 50.0)


class SminCommandTests(_ConDirectorio):

    def test_barrido_en_temperatura(self):
        self._correr("smin", {"l_th_sq_min": 6.0, "l_th_sq_max": 600.0, "points": 3})
        filas = self._filas_csv(self._directorio("smin") / "smin.csv")
        self.assertEqual(filas[0], ["l_th_sq", "s_min"])
        self.assertEqual(len(filas), 4)
        self.assertAlmostEqual(float(filas[1][1]), 1.1118, delta=5e-5)

    def test_rango_bajo_dos_es_config_invalida(self):
        with self.assertRaises(CommandError) as ctx:
            self._correr("smin", {"l_th_sq_min": 1.5, "l_th_sq_max": 10.0})
        self.assertEqual(ctx.exception.returncode, 2)


class VerifyCommandTests(_ConDirectorio):
    OK = VerificationReport(checks=(TermCheck("parallel", "dV_par", 1e-12, 1e-8, True),))
    FALLA = VerificationReport(checks=(TermCheck("parallel", "dT_par_fluct", 1e-2, 1e-8, False),))

    @patch("stochcool.runs.management.commands.verify.report_verification_failure")
    @patch("stochcool.runs.management.commands.verify.run_verification")
    def test_ok_no_reporta(self, run, reportar):
        run.return_value = self.OK
        out = self._correr("verify", {"quick": True})
        self.assertIn("Verificación OK", out)
        reportar.assert_not_called()
        self.assertTrue(run.call_args.kwargs["quick"])

    @patch("stochcool.runs.management.commands.verify.report_verification_failure", return_value=["parallel/dT_par_fluct"])
    @patch("stochcool.runs.management.commands.verify.run_verification")
    def test_falla_sale_con_uno_y_reporta(self, run, reportar):
        run.return_value = self.FALLA
        with self.assertLogs("stochcool.runs.management.commands.verify", level="ERROR"):
            with self.assertRaises(CommandError) as ctx:
                self._correr("verify", {"quick": True})
        self.assertEqual(ctx.exception.returncode, 1)
        reportar.assert_called_once()
        directorio = self._directorio("verify")
        reporte = json.loads((directorio / "verification.json").read_text(encoding="utf-8"))
        self.assertFalse(reporte["passed"])
        self.assertTrue((directorio / "manifest.json").exists())


    @patch("stochcool.runs.management.commands.verify.run_verification")
    def test_flag_quick_pisa_el_config(self, run):
        run.return_value = self.OK
        call_command(
            "verify", self._config({"quick": False}), "--quick",
            output_dir=str(self.tmp / "out"), stdout=StringIO(),
        )
        self.assertIs(run.call_args.kwargs["quick"], True)
        manifest = json.loads((self._directorio("verify") / "manifest.json").read_text(encoding="utf-8"))
        self.assertIs(manifest["config"]["quick"], True)

    @patch("stochcool.runs.management.commands.verify.run_verification")
    def test_sin_flag_manda_el_config(self, run):
        run.return_value = self.OK
        self._correr("verify", {})
        self.assertIs(run.call_args.kwargs["quick"], False)


class SimulateCommandTests(_ConDirectorio):

    CONFIG = dict(BASE_TRAP, n_atoms=10, replicas=4, steps=2, seed=3)

    def test_trayectorias_y_resumen(self):
        self._correr("simulate", self.CONFIG)
        directorio = self._directorio("simulate")
        filas = self._filas_csv(directorio / "trajectories.csv")
        self.assertEqual(filas[0], ["replica", "step", "E_par", "E_perp", "measured_P", "dE_total"])
        self.assertEqual(len(filas), 1 + 4 * 2)
        resumen = json.loads((directorio / "summary.json").read_text(encoding="utf-8"))
        self.assertEqual(resumen["n_replicas"], 4)
        self.assertEqual(len(resumen["steps"]), 2)

    def test_mismos_bytes_con_distintos_procesos(self):
        salidas = self._bytes_por_procesos("simulate", self.CONFIG, "trajectories.csv")
        self.assertEqual(salidas[0], salidas[1])
        self.assertEqual(salidas[0], salidas[2])


class SweepCommandTests(_ConDirectorio):
    def test_grilla_explicita(self):
        config = {"l_th_sq": 200.0, "n_atoms": 100, "s_values": [1.0, 2.0], "d_values": [0.0, 1.0]}
        self._correr("sweep", config)
        filas = self._filas_csv(self._directorio("sweep") / "budget_grid.csv")
        self.assertEqual(filas[0][:3], ["s", "d", "mean_nw"])
        self.assertEqual(filas[0][-1], "dE_total")
        self.assertEqual([(float(f[0]), float(f[1])) for f in filas[1:]], [(1.0, 0.0), (1.0, 1.0), (2.0, 0.0), (2.0, 1.0)])

    def test_mismos_bytes_con_distintos_procesos(self):
        config = {"l_th_sq": 200.0, "n_atoms": 100, "s_min": 0.5, "s_max": 5.0, "s_points": 10, "d_points": 7}
        salidas = self._bytes_por_procesos("sweep", config, "budget_grid.csv")
        self.assertEqual(salidas[0], salidas[1])
        self.assertEqual(salidas[0], salidas[2])

    def test_sweep_exige_unidades_trap(self):

        config = {"units": "si", "omega": 1.0, "mass": 1.0, "temperature": 1.0, "n_atoms": 10}
        with self.assertRaises(CommandError) as ctx:
            self._correr("sweep", config)
        self.assertEqual(ctx.exception.returncode, 2)
        self.assertIn("units", str(ctx.exception))
