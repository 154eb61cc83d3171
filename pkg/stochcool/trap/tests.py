import math

from django.test import SimpleTestCase

from stochcool.trap.domain import (
    ZETA_3,
    BeamGeometry,
    InvalidParameterError,
    ScaledGeometry,
    TrapEnsembleParams,
)
from stochcool.trap.services import (
    beam_from_scaled,
    coth_half_inverse_temperature,
    natural_scales,
    scale_geometry,
)


class TestTrapEnsembleParams(SimpleTestCase):
    def test_parametros_no_positivos_levantan_error(self):
        for campo in ("omega", "mass", "temperature"):
            kwargs = {"omega": 1.0, "mass": 1.0, "temperature": 1.0, "n_atoms": 10}
            kwargs[campo] = 0.0
            with self.subTest(campo=campo):
                with self.assertRaises(InvalidParameterError):
                    TrapEnsembleParams(**kwargs)

    def test_n_atoms_menor_a_uno_levanta_error(self):
        with self.assertRaises(InvalidParameterError):
            TrapEnsembleParams(omega=1.0, mass=1.0, temperature=1.0, n_atoms=0)

    def test_unidades_desconocidas_levantan_error(self):
        with self.assertRaises(InvalidParameterError):
            TrapEnsembleParams(omega=1.0, mass=1.0, temperature=1.0, n_atoms=1, units="cgs")

    def test_from_l_th_sq_invierte_coth(self):
        for l_th_sq in (1.5, 3.0, 200.0, 2.0e4):
            with self.subTest(l_th_sq=l_th_sq):
                params = TrapEnsembleParams.from_l_th_sq(l_th_sq, n_atoms=10)
                self.assertAlmostEqual(natural_scales(params).l_th_sq / l_th_sq, 1.0, places=12)

    def test_from_t_over_t0(self):
        params = TrapEnsembleParams.from_t_over_t0(10.0, n_atoms=1000)
        scales = natural_scales(params)
        self.assertAlmostEqual(params.temperature / scales.T0, 10.0, places=12)

    def test_temperatura_reducida_en_si(self):
        from scipy import constants

        omega = 2 * math.pi * 100.0
        temperature = constants.hbar * omega / constants.k
        params = TrapEnsembleParams(omega=omega, mass=1.44e-25, temperature=temperature, n_atoms=10, units="si")
        self.assertAlmostEqual(params.reduced_temperature, 1.0, places=12)


class TestNaturalScales(SimpleTestCase):
    def test_producto_de_incertezas_es_un_medio(self):
        for mass, omega in ((1.0, 1.0), (3.7, 2.2), (0.01, 40.0)):
            params = TrapEnsembleParams(omega=omega, mass=mass, temperature=1.0, n_atoms=5)
            scales = natural_scales(params)
            with self.subTest(mass=mass, omega=omega):
                self.assertAlmostEqual(scales.dx0 * scales.dp0, 0.5, places=14)

    def test_producto_de_incertezas_en_si_es_hbar_medio(self):
        from scipy import constants

        params = TrapEnsembleParams(omega=2 * math.pi * 50, mass=1.44e-25, temperature=1e-6, n_atoms=10, units="si")
        scales = natural_scales(params)
        self.assertAlmostEqual(scales.dx0 * scales.dp0 / (constants.hbar / 2), 1.0, places=12)

    def test_k_t_igual_omega(self):
        """k_B·T = ω ⇒ l_th² = coth(1/2)"""
        params = TrapEnsembleParams.from_reduced_temperature(1.0, n_atoms=1)
        self.assertAlmostEqual(natural_scales(params).l_th_sq, 1.0 / math.tanh(0.5), places=13)
        self.assertAlmostEqual(natural_scales(params).l_th_sq, 2.1639534137386528, places=12)

    def test_temperatura_cero_reduce_a_estado_fundamental(self):
        params = TrapEnsembleParams.from_reduced_temperature(1e-3, n_atoms=1)
        scales = natural_scales(params)
        self.assertEqual(scales.l_th, 1.0)
        self.assertEqual(scales.L_th, scales.dx0)

    def test_t0_es_raiz_cubica(self):
        """N = 1000 ⇒ T0·ζ(3)^(1/3) = 10·ω/k_B"""
        scales = natural_scales(TrapEnsembleParams.from_reduced_temperature(1.0, n_atoms=1000))
        self.assertAlmostEqual(scales.T0 * ZETA_3 ** (1.0 / 3.0), 10.0, places=12)

    def test_zeta_3(self):
        self.assertAlmostEqual(ZETA_3, 1.2020569031595942, places=15)

    def test_l_th_creciente_en_temperatura(self):
        temperaturas = [0.05, 0.1, 0.5, 1.0, 5.0, 50.0, 1e3, 1e6]
        valores = [coth_half_inverse_temperature(t) for t in temperaturas]
        self.assertTrue(all(b > a for a, b in zip(valores, valores[1:])))
        self.assertTrue(all(v >= 1.0 for v in valores))

    def test_limite_clasico(self):
        """l_th² − 2k_BT/ω → 0 relativo a alta temperatura"""
        for kt in (1e3, 1e6, 1e9):
            l_sq = coth_half_inverse_temperature(kt)
            with self.subTest(kt=kt):
                self.assertLess(abs(l_sq - 2 * kt) / (2 * kt), 1e-6)


class TestScaleGeometry(SimpleTestCase):
    def setUp(self):
        self.scales = natural_scales(TrapEnsembleParams.from_l_th_sq(20.0, n_atoms=100))
        self.L = self.scales.L_th

    def test_radio_igual_a_l_th(self):
        geom = scale_geometry(BeamGeometry(r0=self.L), self.scales)
        self.assertAlmostEqual(geom.s, 1.0, places=14)
        self.assertEqual(geom.d, 0.0)

    def test_pitagoras(self):
        geom = scale_geometry(BeamGeometry(r0=self.L, x0=3 * self.L, y0=4 * self.L), self.scales)
        self.assertAlmostEqual(geom.d, 5.0, places=13)

    def test_signo_del_offset_se_pierde(self):
        geom = scale_geometry(BeamGeometry(r0=2 * self.L, x0=-self.L), self.scales)
        self.assertAlmostEqual(geom.s, 2.0, places=14)
        self.assertAlmostEqual(geom.d, 1.0, places=14)

    def test_invariante_ante_rotacion(self):
        distancias = []
        for angulo in (0.0, 0.4, 1.3, 2.9, 5.0):
            beam = beam_from_scaled(ScaledGeometry(s=1.5, d=2.5), self.scales, angle=angulo)
            distancias.append(scale_geometry(beam, self.scales).d)
        for d in distancias:
            self.assertAlmostEqual(d, 2.5, places=12)

    def test_geometria_escalada_invalida(self):
        with self.assertRaises(InvalidParameterError):
            ScaledGeometry(s=0.0, d=0.0)
        with self.assertRaises(InvalidParameterError):
            ScaledGeometry(s=1.0, d=-1.0)

    def test_s_cuyo_cuadrado_se_anula(self):
        with self.assertRaises(InvalidParameterError):
            ScaledGeometry(s=1e-160)
        self.assertEqual(ScaledGeometry(s=1e-150).s, 1e-150)


class TestBeamGeometry(SimpleTestCase):
    def test_area_integrada_es_pi_r0_cuadrado(self):
        """∫w⊥² dA sobre una grilla fina coincide con π·r0²"""
        import numpy as np

        beam = BeamGeometry(r0=0.7, x0=0.3, y0=-0.2)
        eje = np.linspace(-8.0, 8.0, 801)
        x, y = np.meshgrid(eje, eje, indexing="ij")
        paso = eje[1] - eje[0]
        integral = float(np.sum(beam.profile(x, y) ** 2) * paso * paso)
        self.assertAlmostEqual(integral / beam.intensity_area(), 1.0, places=10)

    def test_gradiente_cuadrado(self):
        import numpy as np

        beam = BeamGeometry(r0=1.3, x0=0.5, y0=0.1)
        x, y = np.array([0.2, -1.0, 2.0]), np.array([0.7, 0.0, -0.4])
        gx, gy = beam.gradient(x, y)
        esperado = beam.profile(x, y) ** 2 * ((x - 0.5) ** 2 + (y - 0.1) ** 2) / 1.3 ** 4
        np.testing.assert_allclose(gx ** 2 + gy ** 2, esperado, rtol=1e-14)

    def test_radio_no_positivo(self):
        with self.assertRaises(InvalidParameterError):
            BeamGeometry(r0=-1.0)
