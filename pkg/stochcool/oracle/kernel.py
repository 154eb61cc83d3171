import logging
import math

import numpy as np

from stochcool.trap.services import natural_scales

from .domain import OracleConstructionError, ThermalKernel1D

logger = logging.getLogger(__name__)

TOL_TRAZA = 1e-10
TOL_MOMENTO_Z = 1e-10
TOL_MOMENTO_P = 1e-8
TOL_GRILLA = 1e-10


def _regla_trapezoidal(n_puntos, extremo):
    nodos = np.linspace(-extremo, extremo, n_puntos)
    paso = nodos[1] - nodos[0]
    pesos = np.full(n_puntos, paso)
    pesos[0] = pesos[-1] = 0.5 * paso
    return nodos, pesos


def build_thermal_kernel(params, points=241, span=12.0):
    """
    Kernel térmico en unidades de oscilador para la temperatura de `params`.

    La grilla trapezoidal cubre ±span·L. Antes de devolverlo se verifican
    traza = 1, ⟨z²⟩ = L², ⟨p²⟩ = l²/2 y que la grilla de paso doble dé las
    mismas integrales; si algo falla levanta OracleConstructionError.
    """
    if points < 5 or points % 2 == 0:
        raise OracleConstructionError(f"points debe ser impar y >= 5 (recibido {points})")
    l_sq = natural_scales(params).l_th_sq
    L = math.sqrt(0.5 * l_sq)
    nodos, pesos = _regla_trapezoidal(points, span * L)
    kernel = ThermalKernel1D(L=L, p2=0.5 * l_sq, nodes=nodos, weights=pesos)

    gruesa = ThermalKernel1D(L=L, p2=kernel.p2, nodes=nodos[::2], weights=2.0 * pesos[::2])
    gruesa.weights[0] = gruesa.weights[-1] = 0.5 * (nodos[2] - nodos[0])

    errores = {
        "traza": (abs(kernel.trace() - 1.0), TOL_TRAZA),
        "z2": (abs(kernel.second_moment() / L ** 2 - 1.0), TOL_MOMENTO_Z),
        "p2": (abs(kernel.momentum_second_moment() / kernel.p2 - 1.0), TOL_MOMENTO_P),
        "grilla": (
            max(abs(kernel.trace() - gruesa.trace()), abs(kernel.second_moment() - gruesa.second_moment()) / L ** 2),
            TOL_GRILLA,
        ),
    }
    fallidos = {nombre: err for nombre, (err, tol) in errores.items() if not (err <= tol)}
    if fallidos:
        raise OracleConstructionError(f"kernel térmico inválido (l²={l_sq!r}): {fallidos}")
    logger.debug("Kernel térmico l²=%g: %s", l_sq, {k: v[0] for k, v in errores.items()})
    return kernel


def _funciones_hermite(x, n_levels):
    """ψ_n(x), n = 0..n_levels−1, por la recurrencia estable normalizada."""
    x = np.asarray(x, dtype=float)
    psi = np.empty((n_levels,) + x.shape)
    psi[0] = math.pi ** -0.25 * np.exp(-0.5 * x ** 2)
    if n_levels > 1:
        psi[1] = math.sqrt(2.0) * x * psi[0]
    for n in range(1, n_levels - 1):
        psi[n + 1] = math.sqrt(2.0 / (n + 1)) * x * psi[n] - math.sqrt(n / (n + 1)) * psi[n - 1]
    return psi


def fock_thermal_kernel(z, zp, reduced_temperature, n_levels=200):
    """
    ρ(z, z') = (1 − e^(−β)) Σ_n e^(−βn) ψ_n(z) ψ_n(z'), β = ω/k_BT.

    Suma directa sobre niveles de Fock, independiente de la forma gaussiana
    cerrada del kernel.
    """
    beta = 1.0 / reduced_temperature
    pesos = -np.expm1(-beta) * np.exp(-beta * np.arange(n_levels))
    psi_z = _funciones_hermite(z, n_levels)
    psi_zp = _funciones_hermite(zp, n_levels)
    return np.tensordot(pesos, psi_z * psi_zp, axes=1)


def kernel_fock_deviation(kernel, reduced_temperature, n_levels=200, extent=3.0, points=41):
    """max |ρ_gauss − ρ_Fock| sobre una grilla (z, z') en ±extent·L."""
    eje = np.linspace(-extent * kernel.L, extent * kernel.L, points)
    z, zp = np.meshgrid(eje, eje, indexing="ij")
    return float(np.max(np.abs(kernel(z, zp) - fock_thermal_kernel(z, zp, reduced_temperature, n_levels))))
