import math

import numpy as np
from django.test import SimpleTestCase

from stochcool.energy.domain import MeasurementSetting
from stochcool.energy.services import delta_E_total, delta_E_total_asymptotic
from stochcool.simulation.domain import BeamProfile, EnsembleState
from stochcool.simulation.services import (
    apply_feedback_kick,
    evolve_harmonic,
    measure_total_momentum,
    replica_generator,
    run_protocol,
    run_replicas,
    sample_thermal,
    summarize_replicas,
    trajectory_rows,
)
from stochcool.trap.domain import InvalidParameterError, ScaledGeometry, TrapEnsembleParams
from stochcool.trap.services import beam_from_scaled, natural_scales

OPTIMO = MeasurementSetting.optimal()


def _haz(params, s, d):
    return beam_from_scaled(ScaledGeometry(s=s, d=d), natural_scales(params))


class TestReplicaGenerator(SimpleTestCase):
    def test_reproducible_por_semilla_y_replica(self):
        self.assertEqual(replica_generator(5, 0).normal(), replica_generator(5, 0).normal())
        self.assertNotEqual(replica_generator(5, 0).normal(), replica_generator(5, 1).normal())


class TestSampleThermal(SimpleTestCase):
    def test_varianza_termica(self):
        params = TrapEnsembleParams.from_l_th_sq(200.0, n_atoms=20000)
        state = sample_thermal(params, seed=1)
        for arreglo in (state.positions, state.momenta):
            np.testing.assert_allclose(np.var(arreglo, axis=0), 200.0, rtol=0.05)

    def test_advierte_regimen_clasico(self):
        with self.assertLogs("stochcool.simulation.services", level="WARNING"):
            sample_thermal(TrapEnsembleParams.from_l_th_sq(5.0, n_atoms=10), seed=0)


class TestPasoElemental(SimpleTestCase):
    def setUp(self):
        self.state = sample_thermal(TrapEnsembleParams.from_l_th_sq(200.0, n_atoms=50), seed=3)

    def test_haz_ancho_cancela_el_momento_del_centro_de_masa(self):
        haz = BeamProfile(r0=1e12)
        despues = apply_feedback_kick(self.state, haz, self.state.total_pz(), n_e=50)
        self.assertLess(abs(despues.total_pz()), 1e-9)
        np.testing.assert_allclose(despues.momenta[:, :2], self.state.momenta[:, :2], rtol=0, atol=1e-15)

    def test_patada_no_modifica_el_original(self):
        antes = self.state.momenta.copy()
        apply_feedback_kick(self.state, BeamProfile(r0=10.0), 3.0, n_e=5.0)
        np.testing.assert_array_equal(self.state.momenta, antes)

    def test_back_action_solo_mueve_z(self):
        _, xi, despues = measure_total_momentum(self.state, BeamProfile(r0=10.0, x0=2.0), sigma_tilde=2.0)
        np.testing.assert_array_equal(despues.positions[:, :2], self.state.positions[:, :2])
        w = BeamProfile(r0=10.0, x0=2.0).weights(self.state.positions)
        np.testing.assert_allclose(despues.positions[:, 2] - self.state.positions[:, 2], xi * w, atol=1e-12)

    def test_evolucion_conserva_energia_por_eje(self):
        rotado = evolve_harmonic(self.state, 0.7)
        antes, despues = self.state.energies(), rotado.energies()
        self.assertAlmostEqual(despues.E_par / antes.E_par, 1.0, places=12)
        self.assertAlmostEqual(despues.E_perp / antes.E_perp, 1.0, places=12)
        self.assertAlmostEqual(rotado.phase, 0.7)

    def test_cuatro_cuartos_de_vuelta(self):
        estado = self.state
        for _ in range(4):
            estado = evolve_harmonic(estado, 0.5 * math.pi)
        np.testing.assert_allclose(estado.positions, self.state.positions, atol=1e-10)
        np.testing.assert_allclose(estado.momenta, self.state.momenta, atol=1e-10)

    def test_forma_invalida(self):
        with self.assertRaises(InvalidParameterError):
            EnsembleState(positions=np.zeros((4, 2)), momenta=np.zeros((4, 2)), rng=replica_generator(0, 0))


class TestRunProtocol(SimpleTestCase):
    def test_haz_enorme_no_toca_el_transversal(self):
        params = TrapEnsembleParams.from_l_th_sq(200.0, n_atoms=20)
        for reg in run_protocol(params, _haz(params, 1e9, 0.0), OPTIMO, n_steps=3, seed=2):
            self.assertLess(abs(reg.dE_perp), 1e-8)

    def test_after_es_antes_de_la_evolucion(self):
        params = TrapEnsembleParams.from_l_th_sq(200.0, n_atoms=20)
        registros = run_protocol(params, _haz(params, 2.0, 0.0), OPTIMO, n_steps=2, inter_step_phase=0.0)
        self.assertAlmostEqual(registros[1].before.E_total, registros[0].after.E_total, places=9)

    def test_parametros_invalidos(self):
        params = TrapEnsembleParams.from_l_th_sq(200.0, n_atoms=20)
        with self.assertRaises(InvalidParameterError):
            run_protocol(params, _haz(params, 2.0, 0.0), OPTIMO, n_steps=0)
        with self.assertRaises(InvalidParameterError):
            run_protocol(params, _haz(params, 2.0, 0.0), OPTIMO, n_steps=1, n_e=0.0)


class TestRunReplicas(SimpleTestCase):
    def test_independiente_de_la_cantidad_de_procesos(self):
        params = TrapEnsembleParams.from_l_th_sq(200.0, n_atoms=30)
        haz = _haz(params, 1.5, 0.5)
        serial = run_replicas(params, haz, OPTIMO, n_steps=3, n_replicas=16, workers=1, seed=11)
        for workers in (4, 16):
            with self.subTest(workers=workers):
                paralelo = run_replicas(params, haz, OPTIMO, n_steps=3, n_replicas=16, workers=workers, seed=11)
                self.assertEqual(serial, paralelo)

    def test_filas_de_trayectoria(self):
        params = TrapEnsembleParams.from_l_th_sq(200.0, n_atoms=10)
        registros = run_replicas(params, _haz(params, 2.0, 0.0), OPTIMO, n_steps=2, n_replicas=3)
        filas = trajectory_rows(registros)
        self.assertEqual(len(filas), 6)
        self.assertEqual([(f["replica"], f["step"]) for f in filas[:3]], [(0, 0), (0, 1), (1, 0)])
        self.assertEqual(set(filas[0]), {"replica", "step", "E_par", "E_perp", "measured_P", "dE_total"})


class TestEstadisticaDeUnPaso(SimpleTestCase):
    """La media sobre réplicas de un paso reproduce las formas cerradas completas."""

    def test_media_de_un_paso_contra_forma_cerrada(self):
        params = TrapEnsembleParams.from_l_th_sq(200.0, n_atoms=100)
        geom = ScaledGeometry(s=1.0, d=1.0)
        haz = beam_from_scaled(geom, natural_scales(params))
        registros = run_replicas(params, haz, OPTIMO, n_steps=1, n_replicas=20000, seed=2024)
        paso = summarize_replicas(registros, params, haz, OPTIMO).steps[0]

        presupuesto = delta_E_total(geom, params, OPTIMO)
        esperado = {
            "dV_par": presupuesto.dV_par,
            "dT_par": presupuesto.dT_par_meas + presupuesto.dT_par_cool + presupuesto.dT_par_fluct,
            "dE_perp": presupuesto.dE_perp,
            "dE_total": presupuesto.dE_total,
        }
        for campo, valor in esperado.items():
            with self.subTest(campo=campo):
                self.assertLess(abs(paso[campo] - valor), 4.0 * paso[f"{campo}_se"])

    def test_haz_muy_ancho_tiende_al_limite_asintotico(self):
        """s → ∞: el paso se lleva la energía cinética del centro de masa, ⟨ΔT∥⟩ → −k_BT/2."""
        params = TrapEnsembleParams.from_l_th_sq(200.0, n_atoms=100)
        scales = natural_scales(params)
        geom = ScaledGeometry(s=1e3, d=0.0)
        haz = beam_from_scaled(geom, scales)
        registros = run_replicas(params, haz, OPTIMO, n_steps=1, n_replicas=20000, seed=77)
        paso = summarize_replicas(registros, params, haz, OPTIMO).steps[0]

        # −l²/4 de enfriamiento más el ¼ de la medición
        self.assertLess(abs(paso["dT_par"] - (0.25 - scales.l_th_sq / 4.0)), 4.0 * paso["dT_par_se"])
        asintotico = delta_E_total_asymptotic(geom, scales, OPTIMO, n_atoms=params.n_atoms)
        self.assertLess(abs(paso["dE_total"] - asintotico), 4.0 * paso["dE_total_se"])


class TestVariosPasos(SimpleTestCase):
    def test_enfria_en_diez_pasos(self):
        params = TrapEnsembleParams.from_l_th_sq(200.0, n_atoms=100)
        haz = _haz(params, 2.0, 0.0)
        registros = run_replicas(params, haz, OPTIMO, n_steps=10, n_replicas=200, seed=9)
        resumen = summarize_replicas(registros, params, haz, OPTIMO)

        self.assertEqual(resumen.n_steps, 10)
        primero = resumen.steps[0]
        self.assertLess(abs(primero["dE_total"] - resumen.prediction.dE_total), 4.0 * primero["dE_total_se"])
        self.assertLess(sum(p["dE_total"] for p in resumen.steps), 0.0)
        self.assertLess(resumen.steps[-1]["E_par"], resumen.steps[0]["E_par"])
        self.assertIsNotNone(resumen.steps[-1]["effective"])

        salida = resumen.as_dict()
        self.assertEqual(salida["n_replicas"], 200)
        self.assertEqual(len(salida["steps"]), 10)

    def test_sin_replicas(self):
        params = TrapEnsembleParams.from_l_th_sq(200.0, n_atoms=10)
        with self.assertRaises(InvalidParameterError):
            summarize_replicas([], params, _haz(params, 2.0, 0.0), OPTIMO)
