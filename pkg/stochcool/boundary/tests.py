import math
from unittest.mock import patch

from django.test import SimpleTestCase
from scipy.optimize import brentq

from stochcool.boundary.domain import (
    TOL_ROOT,
    BoundaryCurve,
    BoundaryMode,
    NoCoolingDomainError,
    NonMonotoneBoundaryError,
)
from stochcool.boundary.services import (
    asymptotic_reference,
    boundary_curve,
    boundary_curves_for_atoms,
    boundary_d_at_s,
    d_of_s_asymptotic,
    energy_function,
    s_min_asymptotic,
    s_min_numeric,
    s_min_sweep,
    sup_distance,
)
from stochcool.energy.domain import MeasurementSetting
from stochcool.trap.domain import InvalidParameterError, TrapEnsembleParams

OPTIMO = MeasurementSetting.optimal()


class TestSMinAsintotico(SimpleTestCase):
    def test_limite_alta_temperatura(self):
        esperado = math.sqrt(math.sqrt(3.0) - 1.0)
        self.assertLess(abs(s_min_asymptotic(math.sqrt(1e15)) - esperado), 1e-12)
        self.assertEqual(s_min_asymptotic(math.inf), esperado)

    def test_l_cuadrado_seis(self):
        self.assertAlmostEqual(s_min_asymptotic(math.sqrt(6.0)), 1.1118, delta=5e-5)

    def test_diverge_cerca_de_dos(self):
        self.assertAlmostEqual(s_min_asymptotic(math.sqrt(2.0001)), 16.79, delta=0.01)
        self.assertGreater(s_min_asymptotic(math.sqrt(2.0 + 1e-12)), 1e3)

    def test_sin_enfriamiento_bajo_dos(self):
        for l_sq in (2.0, 1.5):
            with self.subTest(l_sq=l_sq):
                with self.assertRaises(NoCoolingDomainError):
                    s_min_asymptotic(math.sqrt(l_sq))

    def test_sweep_decreciente_en_temperatura(self):
        tabla = s_min_sweep([2.5, 6.0, 20.0, 200.0, 2e4])
        valores = [s_min for _, s_min in tabla]
        self.assertTrue(all(b < a for a, b in zip(valores, valores[1:])))
        self.assertEqual(tabla[1][0], 6.0)


class TestDdeSAsintotico(SimpleTestCase):
    def test_cero_en_s_min(self):
        l_th = math.sqrt(200.0)
        self.assertLess(d_of_s_asymptotic(s_min_asymptotic(l_th), l_th), 1e-6)

    def test_bajo_s_min_levanta_error(self):
        with self.assertRaises(NoCoolingDomainError):
            d_of_s_asymptotic(0.5, math.sqrt(200.0))

    def test_creciente_en_s(self):
        l_th = math.sqrt(200.0)
        valores = [d_of_s_asymptotic(s, l_th) for s in (0.9, 1.0, 2.0, 5.0, 10.0)]
        self.assertTrue(all(b > a for a, b in zip(valores, valores[1:])))


class TestBoundaryDAtS(SimpleTestCase):
    def setUp(self):
        self.params = TrapEnsembleParams.from_l_th_sq(200.0, n_atoms=10 ** 6)

    def test_modo_asintotico_coincide_con_forma_cerrada(self):
        d = boundary_d_at_s(2.0, BoundaryMode.ASYMPTOTIC, self.params, OPTIMO)
        self.assertAlmostEqual(d, d_of_s_asymptotic(2.0, math.sqrt(200.0)), places=7)

    def test_sin_enfriamiento_en_el_eje_devuelve_none(self):
        self.assertIsNone(boundary_d_at_s(0.3, BoundaryMode.TOTAL, self.params, OPTIMO))

    def test_cero_exacto_en_el_eje(self):
        with patch("stochcool.boundary.services.energy_function", return_value=lambda s, d: 0.0):
            self.assertEqual(boundary_d_at_s(1.0, "total", self.params, OPTIMO), 0.0)

    def test_frontera_multiple_levanta_error(self):
        def f(s, d):
            if d < 0.3:
                return -1.0
            if d < 0.6:
                return 1.0
            if d < 0.9:
                return -1.0
            return 1.0

        with patch("stochcool.boundary.services.energy_function", return_value=f):
            with self.assertRaises(NonMonotoneBoundaryError):
                boundary_d_at_s(1.0, "total", self.params, OPTIMO)

    def test_sin_cota_devuelve_none_y_advierte(self):
        with patch("stochcool.boundary.services.energy_function", return_value=lambda s, d: -1.0):
            with self.assertLogs("stochcool.boundary.services", level="WARNING"):
                self.assertIsNone(boundary_d_at_s(1.0, "total", self.params, OPTIMO))

    def test_raiz_con_brentq_bajo_tol_root(self):
        with patch("stochcool.boundary.services.brentq", wraps=brentq) as raiz:
            d = boundary_d_at_s(2.0, BoundaryMode.TOTAL, self.params, OPTIMO)
        raiz.assert_called()
        f = energy_function(BoundaryMode.TOTAL, self.params, OPTIMO)
        self.assertLessEqual(abs(f(2.0, d)), TOL_ROOT)

    def test_cruce_unico_no_monotono_advierte(self):
        def f(s, d):
            return d - 1.0 - (0.2 if d > 0.4 else 0.0)

        with patch("stochcool.boundary.services.energy_function", return_value=f):
            with self.assertLogs("stochcool.boundary.services", level="WARNING") as logs:
                d = boundary_d_at_s(1.0, "total", self.params, OPTIMO)
        self.assertAlmostEqual(d, 1.2, places=8)
        self.assertIn("no es monótona", logs.output[0])


    def test_modo_desconocido(self):
        with self.assertRaises(InvalidParameterError):
            boundary_d_at_s(1.0, "transversal", self.params, OPTIMO)


class TestBoundaryCurve(SimpleTestCase):
    S_GRID = [0.5 + 0.25 * k for k in range(19)]

    def test_grilla_invalida(self):
        params = TrapEnsembleParams.from_l_th_sq(200.0, n_atoms=100)
        for grilla in ([], [1.0, 1.0], [2.0, 1.0], [0.0, 1.0]):
            with self.subTest(grilla=grilla):
                with self.assertRaises(InvalidParameterError):
                    boundary_curve(grilla, "total", params, OPTIMO)

    def test_curva_vacia_advierte(self):
        params = TrapEnsembleParams.from_l_th_sq(200.0, n_atoms=100)
        with self.assertLogs("stochcool.boundary.services", level="WARNING"):
            curva = boundary_curve([0.1, 0.2, 0.3], "total", params, OPTIMO)
        self.assertTrue(curva.is_empty)
        self.assertIsNone(curva.s_min)
        self.assertEqual(curva.as_rows(), [])

    def test_mas_atomos_agrandan_la_region_de_enfriamiento(self):
        """l² = 200: d(s) crece con N y s_min decrece."""
        params = TrapEnsembleParams.from_l_th_sq(200.0, n_atoms=1)
        curvas = boundary_curves_for_atoms(self.S_GRID, "total", params, OPTIMO, [10 ** 2, 10 ** 4, 10 ** 6])
        for curva in curvas:
            self.assertTrue(curva.s_min_refined)
            self.assertTrue(curva.is_monotone())
        s_mins = [c.s_min for c in curvas]
        self.assertTrue(all(b < a for a, b in zip(s_mins, s_mins[1:])))

        comunes = set(dict(curvas[0].samples))
        for curva in curvas[1:]:
            comunes &= set(dict(curva.samples))
        self.assertTrue(comunes)
        for s in sorted(comunes):
            ds = [dict(c.samples)[s] for c in curvas]
            with self.subTest(s=s):
                self.assertTrue(all(b > a for a, b in zip(ds, ds[1:])))

    def test_params_por_n(self):
        params = TrapEnsembleParams.from_t_over_t0(10.0, 10 ** 6)
        curvas = boundary_curves_for_atoms(
            [2.0, 3.0], "total", params, OPTIMO, [1, 10 ** 6],
            params_for=lambda n: TrapEnsembleParams.from_t_over_t0(10.0, n),
        )
        self.assertLess(curvas[0].l_th_sq, curvas[1].l_th_sq / 50.0)
        misma_temperatura = boundary_curves_for_atoms([2.0, 3.0], "total", params, OPTIMO, [1])
        self.assertEqual(misma_temperatura[0].l_th_sq, curvas[1].l_th_sq)

    def test_transversal_achica_la_region(self):
        params = TrapEnsembleParams.from_l_th_sq(200.0, n_atoms=10 ** 6)
        total = boundary_curve(self.S_GRID, "total", params, OPTIMO)
        solo_long = boundary_curve(self.S_GRID, "longitudinal_only", params, OPTIMO)
        self.assertGreater(total.s_min, solo_long.s_min)
        long_por_s = dict(solo_long.samples)
        for s, d in total.samples:
            if s in long_por_s:
                with self.subTest(s=s):
                    self.assertLess(d, long_por_s[s])

    def test_s_min_refinado_coincide_con_asintotico(self):
        params = TrapEnsembleParams.from_l_th_sq(200.0, n_atoms=10 ** 6)
        curva = boundary_curve(self.S_GRID, "total", params, OPTIMO)
        self.assertAlmostEqual(curva.s_min, s_min_asymptotic(math.sqrt(200.0)), delta=1e-4)

    def test_s_min_se_refina_aunque_la_grilla_empiece_enfriando(self):
        params = TrapEnsembleParams.from_l_th_sq(200.0, n_atoms=10 ** 6)
        curva = boundary_curve([1.5, 2.0], "total", params, OPTIMO)
        self.assertEqual(len(curva.samples), 2)
        self.assertTrue(curva.s_min_refined)
        self.assertLess(curva.s_min, 1.5)
        self.assertAlmostEqual(curva.s_min, s_min_asymptotic(math.sqrt(200.0)), delta=1e-4)


    def test_converge_al_asintotico_en_uno_por_ciento(self):
        for l_sq in (200.0, 2e4):
            params = TrapEnsembleParams.from_l_th_sq(l_sq, n_atoms=10 ** 6)
            s_min = s_min_asymptotic(math.sqrt(l_sq))
            grilla = [1.01 * s_min, 1.5, 2.0, 4.0, 7.0, 10.0]
            curva = boundary_curve(grilla, "total", params, OPTIMO)
            self.assertEqual(len(curva.samples), len(grilla))
            for s, d in curva.samples:
                esperado = d_of_s_asymptotic(s, math.sqrt(l_sq))
                with self.subTest(l_sq=l_sq, s=s):
                    self.assertLess(abs(d - esperado), 1e-2 * esperado)

    def test_temperaturas_altas_son_indistinguibles(self):
        """N = 10⁶: T = 10·T0 y T = 10⁴·T0 dan la misma frontera al 1%."""
        grilla = [1.5, 3.0, 6.0, 10.0]
        tibia = boundary_curve(grilla, "total", TrapEnsembleParams.from_t_over_t0(10.0, 10 ** 6), OPTIMO)
        caliente = boundary_curve(grilla, "total", TrapEnsembleParams.from_t_over_t0(1e4, 10 ** 6), OPTIMO)
        por_s = dict(caliente.samples)
        self.assertEqual(len(tibia.samples), len(grilla))
        for s, d in tibia.samples:
            with self.subTest(s=s):
                self.assertLess(abs(d - por_s[s]), 1e-2 * por_s[s])

    def test_pocos_atomos_se_alejan_mas_del_asintotico(self):
        """T = 10·T0 de cada N: la brecha con la curva N → ∞ se achica al crecer N."""
        grilla = [1.5, 3.0, 5.0, 10.0]
        brechas = []
        for n in (1, 10, 100, 10 ** 6):
            curva = boundary_curve(grilla, "total", TrapEnsembleParams.from_t_over_t0(10.0, n), OPTIMO)
            brechas.append(sup_distance(curva, asymptotic_reference(curva)))
        self.assertNotIn(None, brechas)
        self.assertTrue(all(b < a for a, b in zip(brechas, brechas[1:])), brechas)
        self.assertLess(brechas[-1], 1.0)


    def test_paralelo_identico_al_serial(self):
        params = TrapEnsembleParams.from_l_th_sq(200.0, n_atoms=100)
        serial = boundary_curve(self.S_GRID[:8], "total", params, OPTIMO, workers=1)
        paralelo = boundary_curve(self.S_GRID[:8], "total", params, OPTIMO, workers=3)
        self.assertEqual(serial, paralelo)

    def test_filas_csv(self):
        params = TrapEnsembleParams.from_l_th_sq(200.0, n_atoms=100)
        curva = boundary_curve([2.0, 3.0], "total", params, OPTIMO)
        filas = curva.as_rows()
        self.assertEqual([f["s"] for f in filas], [2.0, 3.0])
        self.assertEqual(set(filas[0]), {"s", "d", "mode", "N", "l_th_sq", "sigma_mode"})
        self.assertEqual(filas[0]["mode"], "total")


class TestSMinNumerico(SimpleTestCase):
    def test_intervalo_sin_enfriamiento(self):
        params = TrapEnsembleParams.from_l_th_sq(200.0, n_atoms=100)
        with self.assertRaises(NoCoolingDomainError):
            s_min_numeric("total", params, OPTIMO, 0.1, 0.2)

    def test_s_lo_que_ya_enfria(self):
        params = TrapEnsembleParams.from_l_th_sq(200.0, n_atoms=100)
        with self.assertRaises(InvalidParameterError):
            s_min_numeric("total", params, OPTIMO, 3.0, 4.0)


class TestSupDistance(SimpleTestCase):
    def test_solo_cuenta_s_comunes(self):
        a = BoundaryCurve(mode=BoundaryMode.TOTAL, samples=((1.0, 0.5), (2.0, 1.0)))
        b = BoundaryCurve(mode=BoundaryMode.TOTAL, samples=((2.0, 1.25), (3.0, 9.0)))
        self.assertEqual(sup_distance(a, b), 0.25)

    def test_sin_s_comunes(self):
        a = BoundaryCurve(mode=BoundaryMode.TOTAL, samples=((1.0, 0.5),))
        b = BoundaryCurve(mode=BoundaryMode.TOTAL, samples=((2.0, 1.25),))
        self.assertIsNone(sup_distance(a, b))
