"""
Balance de energía por paso de enfriamiento estocástico, en forma cerrada.

Todo se expresa en unidades de trampa (energías en cuantos de ω, momentos
en dp0). La temperatura entra solo vía l_th² y la geometría solo vía (s, d).

Los cinco términos transversales se evalúan con el exponente en escala
logarítmica: ⟨N_w⟩ puede hacer underflow a d grande (e^(−d²/(2+s²))) y la
forma ingenua daría 0·∞ = NaN. Con el exponente combinado un término
desbordado vale +∞, nunca NaN, y el buscador de fronteras sigue viendo el
signo correcto.
"""
import logging
import math

from core.utils import map_en_orden
from stochcool.trap.domain import InvalidParameterError, ScaledGeometry
from stochcool.trap.services import natural_scales

from .domain import EnergyBudget

logger = logging.getLogger(__name__)

_EXP_MAX = 709.0


def _exp(x):
    return math.inf if x > _EXP_MAX else math.exp(x)


def _expm1(x):
    return math.inf if x > _EXP_MAX else math.expm1(x)


# ── Geometría ────────────────────────────────────────────────────────────────

def _log_n_over_nw(geom):
    """log(N/⟨N_w⟩) = log(1 + 2/s²) + d²/(2+s²), sin pasar por ⟨N_w⟩."""
    s2 = geom.s * geom.s
    return math.log1p(2.0 / s2) + geom.d * geom.d / (2.0 + s2)


def mean_atoms_in_beam(geom, n_atoms):
    """⟨N_w⟩ = N·s²/(2+s²)·exp(−d²/(2+s²)), como número real."""
    s2 = geom.s * geom.s
    return n_atoms / (1.0 + 2.0 / s2) * math.exp(-geom.d * geom.d / (2.0 + s2))


def geometry_factor(geom):
    """g(s, d) = [4 + s²(2+d²)] / [s²(2+s²)²]."""
    s2 = geom.s * geom.s
    return (4.0 + s2 * (2.0 + geom.d * geom.d)) / (s2 * (2.0 + s2) ** 2)


def sigma_optimal(mean_nw, scales):
    """σ_opt = dp0·sqrt(⟨N_w⟩): minimiza ΔT_meas + ΔV∥ a geometría fija."""
    if not (mean_nw > 0):
        raise InvalidParameterError(f"mean_nw debe ser > 0 (recibido {mean_nw!r})")
    return scales.dp0 * math.sqrt(mean_nw)


def _razon_sigma(geom, n_atoms, meas, scales):
    """
    (t, log t) con t = (σ/dp0)²/⟨N_w⟩. En modo óptimo t = 1 exacto, que es
    lo que hace que el calentamiento por medición quede en 1/2 cuanto.
    """
    if meas.mode == "optimal":
        return 1.0, 0.0
    sigma_tilde = meas.sigma / scales.dp0
    if not (sigma_tilde > 0):
        raise InvalidParameterError(f"sigma resuelto debe ser > 0 (recibido {sigma_tilde!r})")
    log_t = 2.0 * math.log(sigma_tilde) - math.log(n_atoms) + _log_n_over_nw(geom)
    return _exp(log_t), log_t


def _sigma_tilde(geom, n_atoms, meas, scales):
    if meas.mode == "optimal":
        return math.sqrt(mean_atoms_in_beam(geom, n_atoms))
    return meas.sigma / scales.dp0


# ── Longitudinal ─────────────────────────────────────────────────────────────

def delta_V_parallel(meas, mean_nw, scales):
    """ΔV∥ = mω²⟨N_w⟩/(8σ²) = ⟨N_w⟩ / (4·(σ/dp0)²) cuantos."""
    sigma_tilde = meas.resolve(mean_nw, scales)
    if not (sigma_tilde > 0):
        raise InvalidParameterError(f"sigma resuelto debe ser > 0 (recibido {sigma_tilde!r})")
    return mean_nw / (4.0 * sigma_tilde * sigma_tilde)


def _fluctuacion_paralela(geom, n_atoms, l_sq):
    """
    (l²/4N)·{(2+s²)²/(s²(4+s²))·exp[4d²/((2+s²)(4+s²))] − 1}, reescrito como
    (l²/4N)·{razón·expm1(E) + 4/(s²(4+s²))} para no restar números casi iguales
    cuando s es grande.
    """
    s2 = geom.s * geom.s
    a2, a4 = 2.0 + s2, 4.0 + s2
    razon = a2 * a2 / (s2 * a4)
    exponente = 4.0 * geom.d * geom.d / (a2 * a4)
    return l_sq / (4.0 * n_atoms) * (razon * _expm1(exponente) + 4.0 / (s2 * a4))


def delta_E_parallel(geom, params, meas):
    """
    ΔE∥ = [ (σ/dp0)²/⟨N_w⟩ + ⟨N_w⟩/(σ/dp0)² ]/4 − l_th²/4 + término de fluctuación.

    Retorna (dE_par, términos) con el primer corchete separado en su parte
    cinética (ruido de medición) y potencial (back-action).
    """
    scales = natural_scales(params)
    t, _ = _razon_sigma(geom, params.n_atoms, meas, scales)
    terminos = {
        "dV_par": 0.25 / t,
        "dT_par_meas": 0.25 * t,
        "dT_par_cool": -0.25 * scales.l_th_sq,
        "dT_par_fluct": _fluctuacion_paralela(geom, params.n_atoms, scales.l_th_sq),
    }
    return (
        terminos["dV_par"] + terminos["dT_par_meas"] + terminos["dT_par_cool"] + terminos["dT_par_fluct"],
        terminos,
    )


# ── Transversal ──────────────────────────────────────────────────────────────

def _terminos_transversales(geom, n_atoms, l_sq, log_t):
    """
    Los cinco términos de calentamiento transversal, cada uno con su
    prefactor racional en (s, d) y su exponencial propia. Las potencias de
    N/⟨N_w⟩ y σ²/⟨N_w⟩ entran sumadas al exponente.
    """
    s2 = geom.s * geom.s
    d2 = geom.d * geom.d
    a2, a4, a6 = 2.0 + s2, 4.0 + s2, 6.0 + s2
    b = s2 * (2.0 + d2)
    q2, q4, q6 = 4.0 + b, 8.0 + b, 12.0 + b

    lr = _log_n_over_nw(geom)
    log_n = math.log(n_atoms)
    pares = 1.0 - 1.0 / n_atoms
    t = _exp(log_t)

    # N/(4⟨N⟩)·[⟨N⟩/σ̃² + σ̃²/⟨N⟩]·(4 + s²(2+d²))/(2+s²)³·exp(−d²/(2+s²))
    t1 = 0.25 * q2 / a2 ** 3 * (1.0 / t + t) * _exp(lr - d2 / a2)

    # N/(4⟨N⟩)·[(l² + l⁻²)/⟨N⟩ + 2/σ̃²]·(8 + s²(2+d²))/(4+s²)³·exp(−2d²/(4+s²))
    e2 = 2.0 * lr - log_n - 2.0 * d2 / a4
    t2 = 0.25 * q4 / a4 ** 3 * ((l_sq + 1.0 / l_sq) * _exp(e2) + 2.0 * _exp(e2 - log_t))

    # N(N−1)/⟨N⟩²·(l²/4)·s²[4 + s²(2+d²)]/(2+s²)⁴·exp(−2d²/(2+s²))
    t3 = 0.0
    if n_atoms > 1:
        t3 = 0.25 * l_sq * pares * s2 * q2 / a2 ** 4 * _exp(2.0 * lr - 2.0 * d2 / a2)

    # 1/(4σ̃²⟨N⟩²)·N·(12 + s²(2+d²))/(6+s²)³·exp(−3d²/(6+s²))
    t4 = 0.25 * q6 / a6 ** 3 * _exp(3.0 * lr - 2.0 * log_n - log_t - 3.0 * d2 / a6)

    # 1/(4σ̃²⟨N⟩²)·N(N−1)·s²/(2+s²)·(8 + s²(2+d²))/(4+s²)³·exp(−d²(8+3s²)/((4+s²)(2+s²)))
    t5 = 0.0
    if n_atoms > 1:
        t5 = (
            0.25 * pares * s2 / a2 * q4 / a4 ** 3
            * _exp(3.0 * lr - log_n - log_t - d2 * (8.0 + 3.0 * s2) / (a4 * a2))
        )

    return [t1, t2, t3, t4, t5]


def delta_E_perp(geom, params, meas):
    """ΔE⊥ en cuantos, con el desglose de los cinco términos (todos >= 0)."""
    scales = natural_scales(params)
    _, log_t = _razon_sigma(geom, params.n_atoms, meas, scales)
    terminos = _terminos_transversales(geom, params.n_atoms, scales.l_th_sq, log_t)
    return math.fsum(terminos), terminos


def delta_E_total(geom, params, meas):
    scales = natural_scales(params)
    n_atoms = params.n_atoms
    t, log_t = _razon_sigma(geom, n_atoms, meas, scales)
    return EnergyBudget(
        mean_nw=mean_atoms_in_beam(geom, n_atoms),
        sigma_tilde=_sigma_tilde(geom, n_atoms, meas, scales),
        dV_par=0.25 / t,
        dT_par_meas=0.25 * t,
        dT_par_cool=-0.25 * scales.l_th_sq,
        dT_par_fluct=_fluctuacion_paralela(geom, n_atoms, scales.l_th_sq),
        dE_perp_terms=tuple(_terminos_transversales(geom, n_atoms, scales.l_th_sq, log_t)),
    )


# ── Asintótico (N ≫ 1) ───────────────────────────────────────────────────────

def _corchete_medicion(geom, scales, meas, n_atoms):
    """[σ̃²/⟨N⟩ + ⟨N⟩/σ̃²]; vale 2 con σ óptimo."""
    if meas.mode == "optimal":
        return 2.0
    if n_atoms is None:
        raise InvalidParameterError("sigma explícito requiere n_atoms para resolver ⟨N_w⟩")
    t, _ = _razon_sigma(geom, n_atoms, meas, scales)
    return t + 1.0 / t


def delta_E_perp_asymptotic(geom, scales, meas, n_atoms=None):
    """ΔE⊥ ≈ ¼·[⟨N⟩/σ̃² + σ̃²/⟨N⟩ + l²]·g(s, d)."""
    return 0.25 * (_corchete_medicion(geom, scales, meas, n_atoms) + scales.l_th_sq) * geometry_factor(geom)


def delta_E_total_asymptotic(geom, scales, meas, n_atoms=None):
    """
    ΔE ≈ ¼·[σ̃²/⟨N⟩ + ⟨N⟩/σ̃²]·(1 + g) − (l²/4)·(1 − g).
    Con σ óptimo: ½·(1 + g) − (l²/4)·(1 − g).
    """
    g = geometry_factor(geom)
    corchete = _corchete_medicion(geom, scales, meas, n_atoms)
    return 0.25 * corchete * (1.0 + g) - 0.25 * scales.l_th_sq * (1.0 - g)


# ── Barridos ─────────────────────────────────────────────────────────────────

def _fila_presupuestos(argumentos):
    s, d_values, params, meas = argumentos
    return [(s, d, delta_E_total(ScaledGeometry(s=s, d=d), params, meas)) for d in d_values]


def budget_grid(s_values, d_values, params, meas, workers=1):
    """
    Presupuesto sobre la grilla (s, d) en orden fila-mayor. Las filas se
    reparten entre procesos sin afectar el resultado: cada celda es una
    función pura de sus entradas.
    """
    d_values = [float(d) for d in d_values]
    filas = map_en_orden(
        _fila_presupuestos,
        [(float(s), d_values, params, meas) for s in s_values],
        workers=workers,
    )
    logger.debug("budget_grid: %d x %d celdas, workers=%s", len(filas), len(d_values), workers)
    return [celda for fila in filas for celda in fila]
