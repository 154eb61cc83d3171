"""
Oráculo numérico independiente para el balance de energía.

Se parte de las expresiones generales (integrales de densidad, densidad
cinética y anticonmutadores con P_w) y se evalúan por cuadratura sobre el
estado térmico de átomos distinguibles, sin usar ninguna forma cerrada de
stochcool.energy. run_verification compara ambos caminos término a término.
"""
import logging
import math

import numpy as np
from numpy.polynomial.hermite import hermgauss

from stochcool.energy.domain import MeasurementSetting
from stochcool.energy.services import delta_E_parallel, delta_E_perp, mean_atoms_in_beam
from stochcool.trap.domain import InvalidParameterError, ScaledGeometry, TrapEnsembleParams
from stochcool.trap.services import natural_scales

from .domain import MomentTable, QuadratureConvergenceError, TermCheck, VerificationReport
from .kernel import TOL_MOMENTO_Z, TOL_TRAZA, build_thermal_kernel, kernel_fock_deviation

logger = logging.getLogger(__name__)

ORDEN_CUADRATURA = 128
ANGULO_OFFSET = 0.3
POTENCIAS = (2, 4, 6)

TOL_CONVERGENCIA = 1e-10
TOL_N_W = 1e-10
TOL_PARALELO = 1e-8
TOL_PERP = 1e-6
TOL_IMPAR = 1e-12
TOL_FOCK = 1e-8
SIGMAS_MC = 4.0

TEMPERATURAS_FOCK = (0.5, 1.0, 5.0)

GRILLA_COMPLETA = {
    "s": (0.5, 1.0, 2.0, 5.0),
    "d": (0.0, 1.0, 3.0),
    "l_th_sq": (3.0, 20.0, 200.0),
    "n_atoms": (1, 10, 10 ** 6),
}
GRILLA_RAPIDA = {
    "s": (1.0, 2.0),
    "d": (0.0, 1.0),
    "l_th_sq": (20.0,),
    "n_atoms": (1, 10),
}


# ── Cuadratura transversal ───────────────────────────────────────────────────

def _nodos_adaptados(L, r0, centro, k, order):
    """
    Nodos y pesos de Gauss–Hermite para ∫ n(x)·w(x)^k·f(x) dx en un eje.

    n·w^k es gaussiana con precisión 1/v = 1/L² + k/r0² y centro
    μ = v·k·centro/r0²; los nodos se centran y escalan sobre ella, y el
    peso lleva n·w^k exacto en escala logarítmica.
    """
    t, pesos_gh = hermgauss(order)
    v = 1.0 / (1.0 / L ** 2 + k / r0 ** 2)
    mu = v * k * centro / r0 ** 2
    escala = math.sqrt(2.0 * v)
    x = mu + escala * t
    log_n = -0.5 * x ** 2 / L ** 2 - 0.5 * math.log(2.0 * math.pi * L ** 2)
    log_wk = -0.5 * k * (x - centro) ** 2 / r0 ** 2
    with np.errstate(divide="ignore", under="ignore"):
        pesos = escala * np.exp(np.log(pesos_gh) + t ** 2 + log_n + log_wk)
    return x, pesos


def _momentos_transversales(geom, L, order):
    r0 = geom.s * L
    x0 = geom.d * L * math.cos(ANGULO_OFFSET)
    y0 = geom.d * L * math.sin(ANGULO_OFFSET)

    w_moments, grad_moments = {}, {}
    for k in POTENCIAS:
        x, wx = _nodos_adaptados(L, r0, x0, k, order)
        y, wy = _nodos_adaptados(L, r0, y0, k, order)
        X, Y = np.meshgrid(x, y, indexing="ij")
        W = np.outer(wx, wy)
        rho_sq = (X - x0) ** 2 + (Y - y0) ** 2
        w_moments[k] = float(np.sum(W))
        grad_moments[k] = float(np.sum(W * rho_sq)) / r0 ** 4
    return w_moments, grad_moments


def moment_table(geom, kernel, order=ORDEN_CUADRATURA):
    """Momentos de una partícula: transversales por Gauss–Hermite 2D, longitudinales del kernel."""
    w_moments, grad_moments = _momentos_transversales(geom, kernel.L, order)
    z = kernel.nodes
    n = kernel.density(z)
    curvatura = kernel.density_curvature(z)
    return MomentTable(
        w_moments=w_moments,
        grad_moments=grad_moments,
        z2=kernel.integrate(z ** 2 * n),
        p2=kernel.momentum_second_moment(),
        z2_curvature=kernel.integrate(z ** 2 * curvatura),
        curvature=kernel.integrate(curvatura),
        odd=kernel.integrate(z * n),
        order=order,
    )


def quadrature_convergence(geom, kernel, order=ORDEN_CUADRATURA):
    """Máxima diferencia relativa entre la cuadratura de orden `order` y la de 2·order."""
    base = _momentos_transversales(geom, kernel.L, order)
    doble = _momentos_transversales(geom, kernel.L, 2 * order)
    return max(
        abs(a[k] - b[k]) / abs(b[k])
        for a, b in zip(base, doble)
        for k in POTENCIAS
        if b[k] != 0.0
    )


def converged_moment_table(geom, kernel, order=ORDEN_CUADRATURA, tol=TOL_CONVERGENCIA):
    diferencia = quadrature_convergence(geom, kernel, order)
    if diferencia > tol:
        raise QuadratureConvergenceError(
            f"cuadratura no converge en s={geom.s!r}, d={geom.d!r}: {diferencia:.3e} > {tol:.1e}"
        )
    return moment_table(geom, kernel, order)


# ── Momentos colectivos ──────────────────────────────────────────────────────

def collective_moments(table, n_atoms):
    """
    ⟨N_w⟩, ⟨P_w²⟩ y ⟨ΔN_w·P_w²⟩ para N átomos distinguibles.

    Los términos propios cuentan N veces y los de pares N(N−1); los pares
    con momentos distintos se anulan porque ⟨p⟩ = 0.
    """
    w2, w4 = table.w_moments[2], table.w_moments[4]
    return {
        "mean_nw": n_atoms * w2,
        "mean_pw_sq": n_atoms * w2 * table.p2,
        "mean_dn_pw_sq": n_atoms * table.p2 * (w4 - w2 * w2),
    }


def sample_collective_moments(geom, l_th_sq, n_atoms, n_draws, seed=0):
    """
    Los mismos momentos por Monte Carlo clásico directo, con su error estándar.

    Sirve para validar la expansión de átomos distinguibles: ninguno de los
    tres depende del orden de los operadores.
    """
    if n_draws < 2:
        raise InvalidParameterError("n_draws debe ser >= 2")
    rng = np.random.default_rng(seed)
    L = math.sqrt(0.5 * l_th_sq)
    r0 = geom.s * L
    x0, y0 = geom.d * L * math.cos(ANGULO_OFFSET), geom.d * L * math.sin(ANGULO_OFFSET)

    x = rng.normal(0.0, L, size=(n_draws, n_atoms))
    y = rng.normal(0.0, L, size=(n_draws, n_atoms))
    # en unidades de oscilador ⟨p²⟩ = L²
    p = rng.normal(0.0, L, size=(n_draws, n_atoms))
    w = np.exp(-((x - x0) ** 2 + (y - y0) ** 2) / (2.0 * r0 ** 2))

    n_w = np.sum(w ** 2, axis=1)
    pw_sq = np.sum(w * p, axis=1) ** 2
    dn_pw_sq = (n_w - n_w.mean()) * pw_sq

    def media_y_error(muestra):
        return float(muestra.mean()), float(muestra.std(ddof=1) / math.sqrt(n_draws))

    return {
        "mean_nw": media_y_error(n_w),
        "mean_pw_sq": media_y_error(pw_sq),
        "mean_dn_pw_sq": media_y_error(dn_pw_sq),
    }


# ── Balance de energía por el oráculo ────────────────────────────────────────

def _kernel_y_tabla(geom, params, kernel=None, table=None):
    if kernel is None:
        kernel = build_thermal_kernel(params)
    if table is None:
        table = converged_moment_table(geom, kernel)
    return kernel, table


def _sigma_cuadrado(meas, mean_nw, params):
    """σ² en unidades de oscilador (σ² = (σ/dp0)²/2)."""
    sigma_tilde = meas.resolve(mean_nw, natural_scales(params))
    if not (sigma_tilde > 0):
        raise InvalidParameterError(f"sigma resuelto debe ser > 0 (recibido {sigma_tilde!r})")
    return 0.5 * sigma_tilde * sigma_tilde


def oracle_mean_nw(geom, params, kernel=None, table=None):
    _, table = _kernel_y_tabla(geom, params, kernel, table)
    return collective_moments(table, params.n_atoms)["mean_nw"]


def oracle_delta_E_parallel(geom, params, meas, kernel=None, table=None):
    """
    ΔV∥ = ⟨N_w⟩/(8σ²) y ΔT∥ = σ²/(2⟨N_w⟩) − ⟨P_w²⟩/(2⟨N_w⟩) + ⟨ΔN_w P_w²⟩/(2⟨N_w⟩²),
    con los momentos colectivos de la cuadratura.
    """
    _, table = _kernel_y_tabla(geom, params, kernel, table)
    momentos = collective_moments(table, params.n_atoms)
    n = momentos["mean_nw"]
    sigma_sq = _sigma_cuadrado(meas, n, params)
    return {
        "mean_nw": n,
        "dV_par": n / (8.0 * sigma_sq),
        "dT_par_meas": sigma_sq / (2.0 * n),
        "dT_par_cool": -momentos["mean_pw_sq"] / (2.0 * n),
        "dT_par_fluct": momentos["mean_dn_pw_sq"] / (2.0 * n * n),
    }


def oracle_delta_E_perp(geom, params, meas, kernel=None, table=None):
    """
    ΔT⊥ = ½∫dV |∇w|² { ⟨T∥(r)⟩/(2σ²) + [σ²z² + ¾w²]⟨n(r)⟩/⟨N⟩²
                      + [σ²z² + ¼w²]⟨{n(r), P_w²}⟩/(2σ²⟨N⟩²)
                      + w⟨{p_z(r), P_w}⟩/(4σ²⟨N⟩) }

    Cada pieza se integra por separado y se agrupa en los cinco términos
    por peso transversal (w², w⁴, w⁶; propio o de pares). En el término
    propio del anticonmutador, {δ(z − ẑ), p̂²} → 2[n⟨p²⟩ − n''/4].
    """
    _, table = _kernel_y_tabla(geom, params, kernel, table)
    N = params.n_atoms
    n = collective_moments(table, N)["mean_nw"]
    sigma_sq = _sigma_cuadrado(meas, n, params)
    g2, g4, g6 = (table.grad_moments[k] for k in POTENCIAS)
    w2 = table.w_moments[2]
    p2, z2 = table.p2, table.z2
    pares = N * (N - 1)

    piezas = {
        # ⟨T∥(r)⟩ = τ/2 y ∫τ = ⟨p²⟩
        "kinetic": 0.5 * N * g2 * p2 / (4.0 * sigma_sq),
        "density_z2": 0.5 * N * sigma_sq * z2 * g2 / n ** 2,
        "density_w2": 0.5 * N * 0.75 * g4 / n ** 2,
        "anti_self_z2": N * g4 * (p2 * z2 - 0.25 * table.z2_curvature) / (2.0 * n ** 2),
        "anti_self_w2": N * 0.25 * g6 * (p2 - 0.25 * table.curvature) / (2.0 * sigma_sq * n ** 2),
        "anti_pair_z2": pares * w2 * p2 * z2 * g2 / (2.0 * n ** 2),
        "anti_pair_w2": pares * w2 * p2 * 0.25 * g4 / (2.0 * sigma_sq * n ** 2),
        "momentum": N * p2 * g4 / (4.0 * sigma_sq * n),
    }
    terminos = {
        "term_1": piezas["kinetic"] + piezas["density_z2"],
        "term_2": piezas["density_w2"] + piezas["anti_self_z2"] + piezas["momentum"],
        "term_3": piezas["anti_pair_z2"],
        "term_4": piezas["anti_self_w2"],
        "term_5": piezas["anti_pair_w2"],
    }
    # ∫ z ∇w·⟨{p(r), P_w}⟩: el factor longitudinal es el momento impar ∫z·n
    terminos["odd"] = -N * p2 * g2 * table.odd / (2.0 * n)
    terminos["pieces"] = piezas
    return terminos


# ── Verificación ─────────────────────────────────────────────────────────────

def _error_relativo(obtenido, esperado):
    if esperado == 0.0:
        return abs(obtenido)
    return abs(obtenido - esperado) / abs(esperado)


def _check(checks, check, term, error, tol, point):
    checks.append(TermCheck(check=check, term=term, achieved=float(error), required=tol, passed=bool(error <= tol), point=point))


def _verificar_kernels(checks, l_sq_values):
    kernels = {}
    for l_sq in l_sq_values:
        params = TrapEnsembleParams.from_l_th_sq(l_sq, n_atoms=1)
        kernel = build_thermal_kernel(params)
        kernels[l_sq] = kernel
        punto = {"l_th_sq": l_sq}
        _check(checks, "kernel", "trace", abs(kernel.trace() - 1.0), TOL_TRAZA, punto)
        _check(checks, "kernel", "z2", _error_relativo(kernel.second_moment(), kernel.L ** 2), TOL_MOMENTO_Z, punto)
        _check(checks, "kernel", "p2", _error_relativo(kernel.momentum_second_moment(), kernel.p2), TOL_PARALELO, punto)
    for kt in TEMPERATURAS_FOCK:
        params = TrapEnsembleParams.from_reduced_temperature(kt, n_atoms=1)
        desvio = kernel_fock_deviation(build_thermal_kernel(params), kt)
        _check(checks, "fock", "kernel", desvio, TOL_FOCK, {"reduced_temperature": kt})
    return kernels


def _verificar_punto(checks, geom, params, meas, kernel, table):
    punto = {"s": geom.s, "d": geom.d, "l_th_sq": natural_scales(params).l_th_sq, "n_atoms": params.n_atoms}

    n_oraculo = oracle_mean_nw(geom, params, kernel, table)
    _check(checks, "mean_nw", "mean_nw", _error_relativo(n_oraculo, mean_atoms_in_beam(geom, params.n_atoms)), TOL_N_W, punto)

    paralelo = oracle_delta_E_parallel(geom, params, meas, kernel, table)
    _, cerrado_par = delta_E_parallel(geom, params, meas)
    for nombre in ("dV_par", "dT_par_meas", "dT_par_cool", "dT_par_fluct"):
        _check(checks, "parallel", nombre, _error_relativo(paralelo[nombre], cerrado_par[nombre]), TOL_PARALELO, punto)

    perp = oracle_delta_E_perp(geom, params, meas, kernel, table)
    _, cerrado_perp = delta_E_perp(geom, params, meas)
    for i, cerrado in enumerate(cerrado_perp, start=1):
        nombre = f"term_{i}"
        _check(checks, "perp", nombre, _error_relativo(perp[nombre], cerrado), TOL_PERP, punto)
    _check(checks, "perp", "odd", abs(perp["odd"]), TOL_IMPAR, punto)


def _verificar_montecarlo(checks, n_draws=20000, seed=0):
    geom, l_sq = ScaledGeometry(s=1.0, d=1.0), 20.0
    kernel = build_thermal_kernel(TrapEnsembleParams.from_l_th_sq(l_sq, n_atoms=1))
    table = moment_table(geom, kernel)
    for n_atoms in (2, 3):
        esperado = collective_moments(table, n_atoms)
        muestreado = sample_collective_moments(geom, l_sq, n_atoms, n_draws, seed=seed + n_atoms)
        for nombre, (media, error) in muestreado.items():
            desvio = abs(media - esperado[nombre]) / error if error > 0 else math.inf
            _check(checks, "montecarlo", nombre, desvio, SIGMAS_MC, {"s": 1.0, "d": 1.0, "l_th_sq": l_sq, "n_atoms": n_atoms})


def run_verification(grid=None, quick=False, meas=None):
    """
    Corre el oráculo sobre la grilla y devuelve el reporte completo.
    quick usa la grilla reducida; el chequeo Monte Carlo corre siempre.
    """
    grid = grid or (GRILLA_RAPIDA if quick else GRILLA_COMPLETA)
    meas = meas or MeasurementSetting.optimal()
    checks = []

    kernels = _verificar_kernels(checks, grid["l_th_sq"])
    for l_sq, kernel in kernels.items():
        for s in grid["s"]:
            for d in grid["d"]:
                geom = ScaledGeometry(s=float(s), d=float(d))
                diferencia = quadrature_convergence(geom, kernel)
                _check(checks, "quadrature", "convergence", diferencia, TOL_CONVERGENCIA, {"s": s, "d": d, "l_th_sq": l_sq})
                table = moment_table(geom, kernel)
                for n_atoms in grid["n_atoms"]:
                    params = TrapEnsembleParams.from_l_th_sq(l_sq, n_atoms=int(n_atoms))
                    _verificar_punto(checks, geom, params, meas, kernel, table)

    _verificar_montecarlo(checks)

    reporte = VerificationReport(checks=tuple(checks))
    nivel = logging.INFO if reporte.passed else logging.ERROR
    logger.log(nivel, "Verificación: %d chequeos, %d fallidos", len(checks), len(reporte.failures()))
    return reporte
