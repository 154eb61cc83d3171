import math
from unittest.mock import patch

import numpy as np
from django.test import SimpleTestCase

from stochcool.energy import services as energy_services
from stochcool.energy.domain import MeasurementSetting
from stochcool.energy.services import delta_E_parallel, delta_E_perp, mean_atoms_in_beam
from stochcool.oracle.domain import OracleConstructionError, QuadratureConvergenceError
from stochcool.oracle.kernel import build_thermal_kernel, fock_thermal_kernel, kernel_fock_deviation
from stochcool.oracle.services import (
    collective_moments,
    converged_moment_table,
    moment_table,
    oracle_delta_E_parallel,
    oracle_delta_E_perp,
    oracle_mean_nw,
    quadrature_convergence,
    run_verification,
    sample_collective_moments,
)
from stochcool.trap.domain import ScaledGeometry, TrapEnsembleParams

OPTIMO = MeasurementSetting.optimal()


def _g_k(s, d, k, L_sq):
    """⟨w^k ρ'²⟩/r0⁴ en forma cerrada."""
    s2 = s * s
    return math.exp(-k * d * d / (2.0 * (s2 + k))) * (2 * k + s2 * (2.0 + d * d)) / (L_sq * (s2 + k) ** 3)


class TestThermalKernel(SimpleTestCase):
    def setUp(self):
        self.kernel = build_thermal_kernel(TrapEnsembleParams.from_l_th_sq(20.0, n_atoms=1))

    def test_invariantes(self):
        self.assertAlmostEqual(self.kernel.trace(), 1.0, places=12)
        self.assertAlmostEqual(self.kernel.second_moment() / self.kernel.L ** 2, 1.0, places=11)
        self.assertAlmostEqual(self.kernel.momentum_second_moment() / self.kernel.p2, 1.0, places=8)

    def test_densidad_cinetica_contra_derivada_analitica(self):
        z = np.array([-4.0, -1.0, 0.0, 0.5, 3.0])
        L_sq, p2 = self.kernel.L ** 2, self.kernel.p2
        esperado = self.kernel.density(z) * (z ** 2 / (4 * L_sq ** 2) - 1 / (4 * L_sq) + p2)
        np.testing.assert_allclose(self.kernel.kinetic_density(z), esperado, rtol=1e-8)

    def test_curvatura_integrada(self):
        tabla = moment_table(ScaledGeometry(s=1.0), self.kernel)
        self.assertAlmostEqual(tabla.z2_curvature, 2.0, places=7)
        self.assertAlmostEqual(tabla.curvature, 0.0, places=7)
        self.assertLess(abs(tabla.odd), 1e-12)

    def test_grilla_par_levanta_error(self):
        with self.assertRaises(OracleConstructionError):
            build_thermal_kernel(TrapEnsembleParams.from_l_th_sq(20.0, n_atoms=1), points=240)

    def test_grilla_demasiado_corta_falla_la_traza(self):
        with self.assertRaises(OracleConstructionError):
            build_thermal_kernel(TrapEnsembleParams.from_l_th_sq(20.0, n_atoms=1), span=2.0)


class TestFock(SimpleTestCase):
    def test_suma_de_niveles_coincide_con_kernel_gaussiano(self):
        for kt in (0.5, 1.0, 5.0):
            kernel = build_thermal_kernel(TrapEnsembleParams.from_reduced_temperature(kt, n_atoms=1))
            with self.subTest(kt=kt):
                self.assertLess(kernel_fock_deviation(kernel, kt), 1e-8)

    def test_traza_de_fock(self):
        z = np.linspace(-12.0, 12.0, 2401)
        diagonal = fock_thermal_kernel(z, z, 1.0)
        self.assertAlmostEqual(float(np.sum(diagonal) * (z[1] - z[0])), 1.0, places=10)


class TestMomentTable(SimpleTestCase):
    def setUp(self):
        self.kernel = build_thermal_kernel(TrapEnsembleParams.from_l_th_sq(20.0, n_atoms=1))

    def test_momentos_transversales(self):
        L_sq = self.kernel.L ** 2
        for s, d in ((0.5, 0.0), (1.0, 1.0), (5.0, 3.0)):
            tabla = moment_table(ScaledGeometry(s=s, d=d), self.kernel)
            for k in (2, 4, 6):
                w_k = s * s / (s * s + k) * math.exp(-k * d * d / (2.0 * (s * s + k)))
                with self.subTest(s=s, d=d, k=k):
                    self.assertAlmostEqual(tabla.w_moments[k] / w_k, 1.0, places=12)
                    self.assertAlmostEqual(tabla.grad_moments[k] / _g_k(s, d, k, L_sq), 1.0, places=12)

    def test_cuadratura_converge(self):
        self.assertLess(quadrature_convergence(ScaledGeometry(s=0.5, d=3.0), self.kernel), 1e-10)

    def test_falta_de_convergencia_levanta_error(self):
        with self.assertRaises(QuadratureConvergenceError):
            converged_moment_table(ScaledGeometry(s=1.0), self.kernel, tol=-1.0)


class TestMomentosColectivos(SimpleTestCase):
    def test_expansion_coincide_con_montecarlo(self):
        geom, l_sq = ScaledGeometry(s=1.0, d=1.0), 20.0
        tabla = moment_table(geom, build_thermal_kernel(TrapEnsembleParams.from_l_th_sq(l_sq, n_atoms=1)))
        esperado = collective_moments(tabla, 3)
        muestreado = sample_collective_moments(geom, l_sq, 3, n_draws=40000, seed=7)
        for nombre, (media, error) in muestreado.items():
            with self.subTest(momento=nombre):
                self.assertLess(abs(media - esperado[nombre]), 4.0 * error)

    def test_mean_nw_del_oraculo(self):
        params = TrapEnsembleParams.from_l_th_sq(200.0, n_atoms=10 ** 6)
        geom = ScaledGeometry(s=math.sqrt(2.0), d=math.sqrt(2.0))
        self.assertAlmostEqual(oracle_mean_nw(geom, params) / mean_atoms_in_beam(geom, params.n_atoms), 1.0, places=10)


class TestOracleEnergy(SimpleTestCase):
    def test_paralelo_reproduce_forma_cerrada(self):
        for meas in (OPTIMO, MeasurementSetting.explicit(0.7)):
            params = TrapEnsembleParams.from_l_th_sq(20.0, n_atoms=10)
            geom = ScaledGeometry(s=1.5, d=0.8)
            oraculo = oracle_delta_E_parallel(geom, params, meas)
            _, cerrado = delta_E_parallel(geom, params, meas)
            for nombre, valor in cerrado.items():
                with self.subTest(mode=meas.mode, termino=nombre):
                    self.assertLess(abs(oraculo[nombre] / valor - 1.0), 1e-8)

    def test_transversal_reproduce_los_cinco_terminos(self):
        for n_atoms in (1, 10, 10 ** 6):
            params = TrapEnsembleParams.from_l_th_sq(3.0, n_atoms=n_atoms)
            geom = ScaledGeometry(s=2.0, d=1.0)
            oraculo = oracle_delta_E_perp(geom, params, OPTIMO)
            _, cerrado = delta_E_perp(geom, params, OPTIMO)
            for i, valor in enumerate(cerrado, start=1):
                with self.subTest(n_atoms=n_atoms, termino=i):
                    if valor == 0.0:
                        self.assertEqual(oraculo[f"term_{i}"], 0.0)
                    else:
                        self.assertLess(abs(oraculo[f"term_{i}"] / valor - 1.0), 1e-6)
            self.assertLess(abs(oraculo["odd"]), 1e-12)


class TestRunVerification(SimpleTestCase):
    def test_modo_rapido_pasa(self):
        reporte = run_verification(quick=True)
        self.assertTrue(reporte.passed, [c.as_dict() for c in reporte.failures()])
        resumen = reporte.as_dict()
        self.assertEqual(resumen["n_failures"], 0)
        chequeos = {c["check"] for c in resumen["checks"]}
        self.assertTrue({"kernel", "fock", "quadrature", "mean_nw", "parallel", "perp", "montecarlo"} <= chequeos)

    def test_grilla_completa_pasa(self):
        reporte = run_verification()
        self.assertTrue(reporte.passed, [c.as_dict() for c in reporte.failures()])
        rapido = run_verification(quick=True)
        self.assertGreater(len(reporte.checks), len(rapido.checks))
        puntos = {(c.point["s"], c.point["d"], c.point["l_th_sq"]) for c in reporte.checks if c.check == "quadrature"}
        self.assertEqual(len(puntos), 4 * 3 * 3)

    def test_control_negativo_nombra_el_termino_alterado(self):
        real = energy_services.delta_E_parallel

        def alterado(geom, params, meas):
            total, terminos = real(geom, params, meas)
            terminos = dict(terminos, dT_par_fluct=terminos["dT_par_fluct"] * 1.01)
            return total, terminos

        with patch("stochcool.oracle.services.delta_E_parallel", side_effect=alterado):
            with self.assertLogs("stochcool.oracle.services", level="ERROR"):
                reporte = run_verification(quick=True)
        self.assertFalse(reporte.passed)
        self.assertEqual({c.term for c in reporte.failures()}, {"dT_par_fluct"})
