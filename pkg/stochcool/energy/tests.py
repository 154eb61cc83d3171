import math

from django.test import SimpleTestCase

from stochcool.energy.domain import EnergyBudget, MeasurementSetting
from stochcool.energy.services import (
    budget_grid,
    delta_E_parallel,
    delta_E_perp,
    delta_E_perp_asymptotic,
    delta_E_total,
    delta_E_total_asymptotic,
    delta_V_parallel,
    geometry_factor,
    mean_atoms_in_beam,
    sigma_optimal,
)
from stochcool.trap.domain import InvalidParameterError, ScaledGeometry, TrapEnsembleParams
from stochcool.trap.services import natural_scales

OPTIMO = MeasurementSetting.optimal()


class TestMeanAtomsInBeam(SimpleTestCase):
    def test_haz_muy_ancho_cubre_todo(self):
        n = mean_atoms_in_beam(ScaledGeometry(s=1e9), 100)
        self.assertLess(abs(n - 100.0), 1e-10)

    def test_s_uno_centrado(self):
        self.assertAlmostEqual(mean_atoms_in_beam(ScaledGeometry(s=1.0), 3), 1.0, places=14)

    def test_ejemplo_desplazado(self):
        """s = d = √2, N = 10⁶ ⇒ ⟨N_w⟩ = 5·10⁵·e^(−1/2)"""
        n = mean_atoms_in_beam(ScaledGeometry(s=math.sqrt(2.0), d=math.sqrt(2.0)), 10 ** 6)
        self.assertAlmostEqual(n, 303265.3, delta=0.05)


class TestMedicion(SimpleTestCase):
    def setUp(self):
        self.params = TrapEnsembleParams.from_l_th_sq(200.0, n_atoms=10 ** 6)
        self.scales = natural_scales(self.params)

    def test_sigma_explicito_requiere_valor_positivo(self):
        with self.assertRaises(InvalidParameterError):
            MeasurementSetting(mode="explicit")
        with self.assertRaises(InvalidParameterError):
            MeasurementSetting.explicit(-1.0)
        with self.assertRaises(InvalidParameterError):
            MeasurementSetting(mode="otro")

    def test_delta_V_con_sigma_igual_dp0(self):
        meas = MeasurementSetting.explicit(self.scales.dp0)
        self.assertAlmostEqual(delta_V_parallel(meas, 4.0, self.scales), 1.0, places=14)

    def test_sigma_optimo_deja_medio_cuanto(self):
        for s, d in ((0.5, 0.0), (1.0, 1.0), (3.0, 2.0)):
            _, terminos = delta_E_parallel(ScaledGeometry(s=s, d=d), self.params, OPTIMO)
            with self.subTest(s=s, d=d):
                self.assertAlmostEqual(terminos["dV_par"] + terminos["dT_par_meas"], 0.5, places=14)

    def test_compromiso_de_medicion_es_convexo_con_minimo_en_sigma_optimo(self):
        geom = ScaledGeometry(s=1.3, d=0.7)
        n = mean_atoms_in_beam(geom, self.params.n_atoms)
        s_opt = sigma_optimal(n, self.scales)
        valores = []
        for factor in (0.25, 0.5, 0.8, 1.0, 1.25, 2.0, 4.0):
            _, terminos = delta_E_parallel(geom, self.params, MeasurementSetting.explicit(factor * s_opt))
            valores.append(terminos["dV_par"] + terminos["dT_par_meas"])
        self.assertAlmostEqual(valores[3], 0.5, places=12)
        self.assertEqual(min(valores), valores[3])
        for izq, centro, der in zip(valores, valores[1:], valores[2:]):
            self.assertLess(centro, max(izq, der))

    def test_sigma_optimo_con_promedio_no_positivo(self):
        with self.assertRaises(InvalidParameterError):
            sigma_optimal(0.0, self.scales)


class TestDeltaEParallel(SimpleTestCase):
    def test_ejemplo_numerico(self):
        """s = 2, d = 0, N = 10⁶, l² = 200 ⇒ ΔE∥ = 1/2 − 50 + 6.25·10⁻⁶"""
        params = TrapEnsembleParams.from_l_th_sq(200.0, n_atoms=10 ** 6)
        de_par, terminos = delta_E_parallel(ScaledGeometry(s=2.0), params, OPTIMO)
        self.assertAlmostEqual(terminos["dT_par_fluct"], 6.25e-6, places=15)
        self.assertAlmostEqual(de_par, -49.49999375, places=9)

    def test_fluctuacion_positiva_para_s_finito(self):
        params = TrapEnsembleParams.from_l_th_sq(20.0, n_atoms=10)
        for s in (0.1, 1.0, 10.0, 1e3):
            for d in (0.0, 2.0):
                _, terminos = delta_E_parallel(ScaledGeometry(s=s, d=d), params, OPTIMO)
                with self.subTest(s=s, d=d):
                    self.assertGreater(terminos["dT_par_fluct"], 0.0)


class TestDeltaEPerp(SimpleTestCase):
    def test_haz_infinito_no_calienta_transversal(self):
        params = TrapEnsembleParams.from_l_th_sq(200.0, n_atoms=100)
        _, terminos = delta_E_perp(ScaledGeometry(s=1e9), params, OPTIMO)
        self.assertEqual(len(terminos), 5)
        for termino in terminos:
            self.assertLess(termino, 1e-20)

    def test_un_atomo_anula_terminos_de_pares(self):
        params = TrapEnsembleParams.from_l_th_sq(20.0, n_atoms=1)
        _, terminos = delta_E_perp(ScaledGeometry(s=1.0, d=0.5), params, OPTIMO)
        self.assertEqual(terminos[2], 0.0)
        self.assertEqual(terminos[4], 0.0)
        self.assertGreater(terminos[0], 0.0)

    def test_terminos_no_negativos(self):
        params = TrapEnsembleParams.from_l_th_sq(3.0, n_atoms=10)
        for s in (0.2, 1.0, 5.0):
            for d in (0.0, 1.0, 4.0):
                _, terminos = delta_E_perp(ScaledGeometry(s=s, d=d), params, MeasurementSetting.explicit(1.0))
                with self.subTest(s=s, d=d):
                    self.assertTrue(all(t >= 0.0 for t in terminos))

    def test_underflow_de_n_w_da_infinito_no_nan(self):
        params = TrapEnsembleParams.from_l_th_sq(20.0, n_atoms=10)
        geom = ScaledGeometry(s=1.0, d=200.0)
        for meas in (OPTIMO, MeasurementSetting.explicit(1.0)):
            presupuesto = delta_E_total(geom, params, meas)
            with self.subTest(mode=meas.mode):
                self.assertFalse(math.isnan(presupuesto.dE_total))
                self.assertEqual(presupuesto.dE_total, math.inf)


class TestDeltaETotal(SimpleTestCase):
    def test_limite_sin_haz_a_l_cuadrado_dos(self):
        """l² = 2 y s → ∞: el enfriamiento compensa exactamente la medición."""
        params = TrapEnsembleParams.from_l_th_sq(2.0, n_atoms=100)
        presupuesto = delta_E_total(ScaledGeometry(s=1e9), params, OPTIMO)
        self.assertAlmostEqual(presupuesto.dE_total, 0.0, places=12)

    def test_presupuesto_suma_sus_partes(self):
        params = TrapEnsembleParams.from_l_th_sq(50.0, n_atoms=1000)
        geom = ScaledGeometry(s=1.7, d=0.9)
        presupuesto = delta_E_total(geom, params, OPTIMO)
        de_par, _ = delta_E_parallel(geom, params, OPTIMO)
        de_perp, _ = delta_E_perp(geom, params, OPTIMO)
        self.assertIsInstance(presupuesto, EnergyBudget)
        self.assertAlmostEqual(presupuesto.dE_par, de_par, places=12)
        self.assertAlmostEqual(presupuesto.dE_perp, de_perp, places=12)
        self.assertAlmostEqual(presupuesto.dE_total, de_par + de_perp, places=12)
        self.assertNotIn("dV_perp", presupuesto.as_dict())

    def test_no_decreciente_en_d(self):
        params = TrapEnsembleParams.from_l_th_sq(200.0, n_atoms=100)
        for s in (0.5, 1.0, 3.0):
            valores = [delta_E_total(ScaledGeometry(s=s, d=0.25 * k), params, OPTIMO).dE_total for k in range(25)]
            with self.subTest(s=s):
                self.assertTrue(all(b >= a for a, b in zip(valores, valores[1:])))


class TestAsintotico(SimpleTestCase):
    def test_factor_geometrico(self):
        self.assertAlmostEqual(geometry_factor(ScaledGeometry(s=1.0)), 2.0 / 3.0, places=15)

    def test_converge_al_exacto_para_n_grande(self):
        params = TrapEnsembleParams.from_l_th_sq(200.0, n_atoms=10 ** 6)
        scales = natural_scales(params)
        for s in (1.0, 2.0, 3.0, 5.0):
            for d in (0.0, 1.0, 2.0):
                geom = ScaledGeometry(s=s, d=d)
                exacto = delta_E_total(geom, params, OPTIMO).dE_total
                asintotico = delta_E_total_asymptotic(geom, scales, OPTIMO)
                with self.subTest(s=s, d=d):
                    self.assertLess(abs(exacto - asintotico), 1e-2 * max(1.0, abs(asintotico)))

    def test_perp_asintotico_con_sigma_optimo(self):
        scales = natural_scales(TrapEnsembleParams.from_l_th_sq(20.0, n_atoms=10))
        geom = ScaledGeometry(s=1.0)
        self.assertAlmostEqual(
            delta_E_perp_asymptotic(geom, scales, OPTIMO), 0.25 * (2.0 + 20.0) * 2.0 / 3.0, places=10
        )

    def test_sigma_explicito_exige_n_atoms(self):
        scales = natural_scales(TrapEnsembleParams.from_l_th_sq(20.0, n_atoms=10))
        with self.assertRaises(InvalidParameterError):
            delta_E_total_asymptotic(ScaledGeometry(s=1.0), scales, MeasurementSetting.explicit(1.0))


class TestBudgetGrid(SimpleTestCase):
    def test_orden_fila_mayor(self):
        params = TrapEnsembleParams.from_l_th_sq(20.0, n_atoms=10)
        celdas = budget_grid([1.0, 2.0], [0.0, 0.5, 1.0], params, OPTIMO)
        self.assertEqual([(s, d) for s, d, _ in celdas], [(1.0, 0.0), (1.0, 0.5), (1.0, 1.0), (2.0, 0.0), (2.0, 0.5), (2.0, 1.0)])

    def test_paralelo_identico_al_serial(self):
        params = TrapEnsembleParams.from_l_th_sq(20.0, n_atoms=10)
        s_values, d_values = [0.5, 1.0, 2.0, 4.0], [0.0, 1.0, 2.0]
        serial = budget_grid(s_values, d_values, params, OPTIMO, workers=1)
        paralelo = budget_grid(s_values, d_values, params, OPTIMO, workers=2)
        self.assertEqual(serial, paralelo)
