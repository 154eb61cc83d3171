"""
Frontera de enfriamiento ΔE(s, d) = 0 en el plano (s, d).

Para cada s se busca el d donde el paso deja de enfriar: ΔE(s, 0) < 0 en
el eje y ΔE crece con d, así que basta acotar y resolver con brentq. El
muestreo previo de PUNTOS_MUESTREO puntos detecta fronteras múltiples antes de
confiar en brentq; si ΔE no resulta monótona en d se advierte.
"""
import logging
import math

import numpy as np
from scipy.optimize import brentq

from core.utils import map_en_orden
from stochcool.energy.services import (
    delta_E_parallel,
    delta_E_total,
    delta_E_total_asymptotic,
)
from stochcool.trap.domain import InvalidParameterError, ScaledGeometry
from stochcool.trap.services import natural_scales

from .domain import (
    D_INICIAL,
    D_MAX,
    MAX_ITERACIONES,
    PUNTOS_MUESTREO,
    TOL_D,
    TOL_ROOT,
    BoundaryCurve,
    BoundaryMode,
    NoCoolingDomainError,
    NonMonotoneBoundaryError,
)

logger = logging.getLogger(__name__)

# Ruido de redondeo tolerado bajo cero en el argumento de la raíz de d(s).
_HOLGURA_RAIZ = 1e-12
# Descenso relativo de ΔE entre puntos del muestreo que se atribuye a redondeo.
_HOLGURA_MONOTONIA = 1e-9
_XTOL_MINIMO = 1e-300
_MAX_MITADES = 60


# ── Funciones de energía por modo ────────────────────────────────────────────

def _solo_longitudinal(params, meas):
    return lambda s, d: delta_E_parallel(ScaledGeometry(s=s, d=d), params, meas)[0]


def _total(params, meas):
    return lambda s, d: delta_E_total(ScaledGeometry(s=s, d=d), params, meas).dE_total


def _asintotico(params, meas):
    scales = natural_scales(params)
    return lambda s, d: delta_E_total_asymptotic(ScaledGeometry(s=s, d=d), scales, meas, n_atoms=params.n_atoms)


# Un modo nuevo = una entrada acá.
_CONSTRUCTORES_DE_ENERGIA = {
    BoundaryMode.LONGITUDINAL_ONLY: _solo_longitudinal,
    BoundaryMode.TOTAL: _total,
    BoundaryMode.ASYMPTOTIC: _asintotico,
}


def energy_function(mode, params, meas):
    """f(s, d) = ΔE del modo pedido, en cuantos."""
    try:
        constructor = _CONSTRUCTORES_DE_ENERGIA[BoundaryMode(mode)]
    except ValueError:
        raise InvalidParameterError(f"modo de frontera desconocido: {mode!r}") from None
    return constructor(params, meas)


# ── Raíz en d a s fijo ───────────────────────────────────────────────────────

def _cambios_de_signo(valores):
    signos = [v >= 0 for v in valores]
    return sum(1 for a, b in zip(signos, signos[1:]) if a != b)


def _es_creciente(valores):
    return all(b >= a or b >= a - _HOLGURA_MONOTONIA * max(1.0, abs(a)) for a, b in zip(valores, valores[1:]))


def _tramo_finito(g, lo, hi):
    """Achica [lo, hi] hasta que g sea finita en los extremos, sin perder el cambio de signo."""
    g_lo, g_hi = g(lo), g(hi)
    for _ in range(MAX_ITERACIONES):
        if math.isfinite(g_lo) and math.isfinite(g_hi):
            break
        mid = 0.5 * (lo + hi)
        g_mid = g(mid)
        if (g_mid < 0) == (g_lo < 0):
            lo, g_lo = mid, g_mid
        else:
            hi, g_hi = mid, g_mid
    return lo, hi


def _raiz(g, lo, hi, tol_root, xtol):
    """brentq en [lo, hi]; si |g| queda sobre tol_root se aprieta hasta resolución de punto flotante."""
    lo, hi = _tramo_finito(g, lo, hi)
    raiz = brentq(g, lo, hi, xtol=xtol, maxiter=MAX_ITERACIONES)
    if abs(g(raiz)) > tol_root:
        raiz = brentq(g, lo, hi, xtol=_XTOL_MINIMO, maxiter=MAX_ITERACIONES)
    return raiz


def boundary_d_at_s(s, mode, params, meas, tol_root=TOL_ROOT, tol_d=TOL_D):
    """
    d ≥ 0 con ΔE(s, d) = 0, o None si a ese s no hay enfriamiento en el eje
    (ΔE(s, 0) ≥ 0) o si ΔE sigue negativo hasta D_MAX.
    """
    f = energy_function(mode, params, meas)

    f0 = f(s, 0.0)
    if abs(f0) <= tol_root:
        return 0.0
    if f0 > 0:
        return None

    d_hi = D_INICIAL
    while f(s, d_hi) < 0:
        if d_hi >= D_MAX:
            logger.warning("Sin cota para la frontera en s=%g: ΔE < 0 hasta d=%g", s, D_MAX)
            return None
        d_hi = min(2.0 * d_hi, D_MAX)

    muestreo = np.linspace(0.0, d_hi, PUNTOS_MUESTREO)
    valores = [f(s, float(d)) for d in muestreo]
    cambios = _cambios_de_signo(valores)
    if cambios > 1:
        raise NonMonotoneBoundaryError(s, cambios)
    if not _es_creciente(valores):
        logger.warning("ΔE(s=%g, d) no es monótona en [0, %g]; el cruce sigue siendo único", s, d_hi)

    # el muestreo ya acota: partir del subintervalo con el cambio
    k = next(i for i in range(1, len(valores)) if valores[i] >= 0)
    return _raiz(lambda d: f(s, d), float(muestreo[k - 1]), float(muestreo[k]), tol_root, tol_d)


def _raiz_en_s(argumentos):
    s, mode, params, meas = argumentos
    return boundary_d_at_s(s, mode, params, meas)


# ── s_min ────────────────────────────────────────────────────────────────────

def s_min_numeric(mode, params, meas, s_lo, s_hi, tol=TOL_D):
    """
    Raíz en s de ΔE(s, 0) para el s_min a N finito.
    Requiere ΔE(s_lo, 0) ≥ 0 > ΔE(s_hi, 0).
    """
    f = energy_function(mode, params, meas)
    if f(s_hi, 0.0) >= 0:
        raise NoCoolingDomainError(f"ΔE(s={s_hi!r}, 0) >= 0: no hay enfriamiento en el intervalo")
    if f(s_lo, 0.0) < 0:
        raise InvalidParameterError(f"ΔE(s={s_lo!r}, 0) < 0: s_lo ya enfría, no acota s_min")

    def g(s):
        return f(s, 0.0)

    lo, hi = _tramo_finito(g, float(s_lo), float(s_hi))
    return brentq(g, lo, hi, xtol=tol, rtol=tol, maxiter=MAX_ITERACIONES)


def _cota_inferior_en_s(mode, params, meas, s):
    """Primer s/2^k con ΔE(s, 0) ≥ 0, o None. En todos los modos ΔE(s, 0) → +∞ cuando s → 0."""
    f = energy_function(mode, params, meas)
    for _ in range(_MAX_MITADES):
        s *= 0.5
        if f(s, 0.0) >= 0:
            return s
    return None


def _factor_a(l_th):
    """A = 1 − 4/(l²+2) = (l² − 2)/(l² + 2)."""
    l_sq = l_th * l_th
    if math.isinf(l_sq):
        return 1.0
    if not (l_sq > 2.0):
        raise NoCoolingDomainError(f"l_th² = {l_sq!r} <= 2: ningún haz enfría")
    return (l_sq - 2.0) / (l_sq + 2.0)


def s_min_asymptotic(l_th):
    """
    s_min = sqrt(sqrt(1 + 2/A) − 1). Tiende a (√3 − 1)^½ a alta temperatura
    y diverge como (8/(l² − 2))^¼ cuando l² → 2.
    """
    a = _factor_a(l_th)
    return math.sqrt(math.sqrt(1.0 + 2.0 / a) - 1.0)


def d_of_s_asymptotic(s, l_th):
    """d(s) = sqrt(A·(2+s²)² − 2 − 4/s²), la frontera a N → ∞ con σ óptimo."""
    if not (s > 0):
        raise InvalidParameterError(f"s debe ser > 0 (recibido {s!r})")
    a = _factor_a(l_th)
    s2 = s * s
    principal = a * (2.0 + s2) ** 2
    argumento = principal - 2.0 - 4.0 / s2
    if argumento < 0:
        if argumento >= -_HOLGURA_RAIZ * principal:
            return 0.0
        raise NoCoolingDomainError(f"s={s!r} bajo s_min={s_min_asymptotic(l_th)!r}")
    return math.sqrt(argumento)


def s_min_sweep(l_th_sq_values):
    """[(l², s_min)] para la curva de s_min contra temperatura."""
    return [(float(l_sq), s_min_asymptotic(math.sqrt(l_sq))) for l_sq in l_th_sq_values]


# ── Curvas ───────────────────────────────────────────────────────────────────

def _validar_grilla(s_grid):
    s_grid = [float(s) for s in s_grid]
    if not s_grid:
        raise InvalidParameterError("la grilla en s está vacía")
    if any(not (s > 0) for s in s_grid):
        raise InvalidParameterError("la grilla en s debe ser positiva")
    if any(b <= a for a, b in zip(s_grid, s_grid[1:])):
        raise InvalidParameterError("la grilla en s debe ser estrictamente creciente")
    return s_grid


def boundary_curve(s_grid, mode, params, meas, workers=1):
    mode = BoundaryMode(mode)
    s_grid = _validar_grilla(s_grid)

    raices = map_en_orden(_raiz_en_s, [(s, mode, params, meas) for s in s_grid], workers=workers)
    samples = tuple((s, d) for s, d in zip(s_grid, raices) if d is not None)

    comunes = {
        "mode": mode,
        "n_atoms": params.n_atoms,
        "l_th_sq": natural_scales(params).l_th_sq,
        "sigma_mode": meas.mode,
    }
    if not samples:
        logger.warning("Frontera vacía: ningún s de la grilla enfría (modo=%s, N=%d)", mode.value, params.n_atoms)
        return BoundaryCurve(samples=(), s_min=None, **comunes)

    primero = next(i for i, d in enumerate(raices) if d is not None)
    s_min, refinado = samples[0][0], False
    if primero > 0:
        s_lo = s_grid[primero - 1]
    else:
        # la grilla arranca dentro de la región: buscar la cota hacia s → 0
        s_lo = _cota_inferior_en_s(mode, params, meas, s_grid[0])
    if s_lo is not None:
        try:
            s_min = s_min_numeric(mode, params, meas, s_lo, s_grid[primero])
            refinado = True
        except (InvalidParameterError, NoCoolingDomainError):
            # el s previo enfría en el eje pero no tuvo cota en d
            logger.warning("s_min sin refinar en s=%g", s_grid[primero], exc_info=True)

    curva = BoundaryCurve(samples=samples, s_min=s_min, s_min_refined=refinado, **comunes)
    if not curva.is_monotone():
        logger.warning("Frontera no monótona en s (modo=%s, N=%d)", mode.value, params.n_atoms)
    return curva


def boundary_curves_for_atoms(s_grid, mode, params, meas, n_atoms_list, workers=1, params_for=None):
    """
    Una curva por N. Por defecto todas a la temperatura de `params`;
    `params_for(n)` permite fijar otra magnitud por N (p. ej. T/T0).
    """
    params_for = params_for or params.with_atoms
    return [boundary_curve(s_grid, mode, params_for(int(n)), meas, workers=workers) for n in n_atoms_list]


def sup_distance(curve, reference):
    """max |d − d_ref| sobre los s comunes a ambas curvas; None si no comparten ninguno."""
    ref = dict(reference.samples)
    distancias = [abs(d - ref[s]) for s, d in curve.samples if s in ref]
    return max(distancias) if distancias else None


def asymptotic_reference(curve):
    """La curva a N → ∞ evaluada en los mismos s que `curve`."""
    l_th = math.sqrt(curve.l_th_sq)
    samples = tuple((s, d_of_s_asymptotic(s, l_th)) for s, _ in curve.samples if s >= s_min_asymptotic(l_th))
    return BoundaryCurve(
        mode=BoundaryMode.ASYMPTOTIC,
        samples=samples,
        s_min=s_min_asymptotic(l_th),
        n_atoms=curve.n_atoms,
        l_th_sq=curve.l_th_sq,
        sigma_mode="optimal",
        s_min_refined=True,
    )


