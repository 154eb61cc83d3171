"""
Simulación Monte Carlo del protocolo medición + patada sobre un ensamble
clásico de N átomos en la trampa.

Cada paso: se mide P̃ = Σ w·p̃_z + ruido, la medición empuja las posiciones
(back-action), se aplica la patada de realimentación y después la trampa
rota el espacio de fases una fase libre. El orden de consumo del generador
por paso es fijo: ruido de la medición, back-action, fase.
"""
import logging
import math

import numpy as np

from core.utils import map_en_orden
from stochcool.energy.domain import MeasurementSetting
from stochcool.energy.services import delta_E_total, mean_atoms_in_beam
from stochcool.trap.domain import InvalidParameterError, ScaledGeometry, TrapEnsembleParams
from stochcool.trap.services import natural_scales, scale_geometry

from .domain import (
    CAMPOS_DE_PASO,
    BeamProfile,
    EnsembleState,
    FeedbackStepRecord,
    ReplicaSummary,
    error_estandar,
)

logger = logging.getLogger(__name__)

# Debajo de esto el ensamble clásico ya no representa bien al estado térmico.
L_SQ_CLASICO = 10.0


def replica_generator(seed, replica):
    """Stream independiente por réplica, derivado de (seed, replica) y no del orden de ejecución."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(replica,)))


def sample_thermal(params, seed=None, rng=None):
    """
    Ensamble clásico con ⟨x̃²⟩ = ⟨p̃²⟩ = l_th² por eje, las mismas varianzas
    que el estado térmico cuántico.
    """
    if rng is None:
        rng = np.random.default_rng(seed)
    l_sq = natural_scales(params).l_th_sq
    if l_sq < L_SQ_CLASICO:
        logger.warning(
            "l_th² = %.4g < %g: el ensamble clásico es sólo aproximado a esta temperatura", l_sq, L_SQ_CLASICO
        )
    escala = math.sqrt(l_sq)
    forma = (params.n_atoms, 3)
    return EnsembleState(
        positions=rng.normal(0.0, escala, size=forma),
        momenta=rng.normal(0.0, escala, size=forma),
        rng=rng,
    )


def measure_total_momentum(state, beam, sigma_tilde):
    """
    Medición de P̃ con resolución σ̃ (en dp0).

    Devuelve (P̃, ξ, estado tras la back-action). ξ ~ N(0, 1/σ̃²) desplaza
    z̃ en ξ·w y, por el gradiente del perfil, quita ξ·p̃_z·∇w al momento
    transversal.
    """
    w = beam.weights(state.positions)
    P = float(np.dot(w, state.momenta[:, 2])) + state.rng.normal(0.0, sigma_tilde)
    xi = float(state.rng.normal(0.0, 1.0 / sigma_tilde))

    nuevo = state.copy()
    nuevo.momenta[:, :2] -= xi * state.momenta[:, 2:3] * beam.gradients(state.positions)
    nuevo.positions[:, 2] += xi * w
    return P, xi, nuevo


def apply_feedback_kick(state, beam, P, n_e):
    """p̃_z −= P̃·w/N_e y p̃⊥ −= (P̃/N_e)·z̃·∇w con el z̃ vigente."""
    escala = P / n_e
    nuevo = state.copy()
    nuevo.momenta[:, 2] -= escala * beam.weights(state.positions)
    nuevo.momenta[:, :2] -= escala * state.positions[:, 2:3] * beam.gradients(state.positions)
    return nuevo


def evolve_harmonic(state, phase):
    """Rotación exacta (x̃, p̃) → (x̃ cos φ + p̃ sin φ, −x̃ sin φ + p̃ cos φ) en los tres ejes."""
    c, s = math.cos(phase), math.sin(phase)
    nuevo = state.copy()
    nuevo.positions = c * state.positions + s * state.momenta
    nuevo.momenta = -s * state.positions + c * state.momenta
    nuevo.phase = state.phase + phase
    return nuevo


def _condiciones(params, beam, meas, n_e=None):
    """(perfil escalado, geometría, σ̃, N_e) que comparten simulación y resumen."""
    scales = natural_scales(params)
    geom = scale_geometry(beam, scales)
    mean_nw = mean_atoms_in_beam(geom, params.n_atoms)
    sigma_tilde = meas.resolve(mean_nw, scales)
    if n_e is None:
        n_e = mean_nw
    if not (math.isfinite(n_e) and n_e > 0):
        raise InvalidParameterError(f"n_e debe ser > 0 (recibido {n_e!r})")
    if not (sigma_tilde > 0):
        raise InvalidParameterError("la geometría no ilumina ningún átomo (⟨N_w⟩ = 0)")
    return BeamProfile.from_geometry(beam, scales), geom, sigma_tilde, n_e


def _exigir_entero_positivo(nombre, valor):
    if isinstance(valor, bool) or not isinstance(valor, (int, np.integer)) or valor < 1:
        raise InvalidParameterError(f"{nombre} debe ser un entero >= 1 (recibido {valor!r})")


def run_protocol(params, beam, meas, n_steps, inter_step_phase=None, seed=0, replica=0, n_e=None):
    """
    Una réplica de n_steps pasos de enfriamiento.

    σ̃ y N_e se fijan con la temperatura inicial. Entre pasos la trampa rota
    inter_step_phase, o una fase uniforme en [0, 2π) si es None.
    """
    _exigir_entero_positivo("n_steps", n_steps)
    perfil, _, sigma_tilde, n_e = _condiciones(params, beam, meas, n_e)
    state = sample_thermal(params, rng=replica_generator(seed, replica))

    registros = []
    for paso in range(n_steps):
        antes = state.energies()
        P, xi, state = measure_total_momentum(state, perfil, sigma_tilde)
        state = apply_feedback_kick(state, perfil, P, n_e)
        registros.append(
            FeedbackStepRecord(
                step=paso,
                measured_P=P,
                back_action=xi,
                kick_scale=P / n_e,
                before=antes,
                after=state.energies(),
            )
        )
        if paso < n_steps - 1:
            fase = inter_step_phase if inter_step_phase is not None else state.rng.uniform(0.0, 2.0 * math.pi)
            state = evolve_harmonic(state, fase)
    return registros


def _correr_replica(argumentos):
    params, beam, meas, n_steps, inter_step_phase, seed, replica, n_e = argumentos
    return run_protocol(params, beam, meas, n_steps, inter_step_phase, seed, replica, n_e)


def run_replicas(params, beam, meas, n_steps, n_replicas, workers=1, inter_step_phase=None, seed=0, n_e=None):
    """Lista de réplicas (cada una, lista de FeedbackStepRecord) en orden de réplica."""
    _exigir_entero_positivo("n_replicas", n_replicas)
    _exigir_entero_positivo("n_steps", n_steps)
    tareas = [(params, beam, meas, n_steps, inter_step_phase, seed, r, n_e) for r in range(n_replicas)]
    logger.info("Simulando %d réplicas x %d pasos (N=%d)", n_replicas, n_steps, params.n_atoms)
    return map_en_orden(_correr_replica, tareas, workers)


def _prediccion_efectiva(e_par_medio, params, perfil, sigma_tilde):
    """Forma cerrada a l_eff² = 2⟨E_par⟩/N, con la misma geometría física y el mismo σ̃."""
    l_eff_sq = 2.0 * e_par_medio / params.n_atoms
    if not (l_eff_sq > 1.0):
        return None
    efectivos = TrapEnsembleParams.from_l_th_sq(l_eff_sq, params.n_atoms)
    l_eff = math.sqrt(l_eff_sq)
    geom = ScaledGeometry(s=perfil.r0 / l_eff, d=math.hypot(perfil.x0, perfil.y0) / l_eff)
    meas = MeasurementSetting.explicit(sigma_tilde * natural_scales(efectivos).dp0)
    return {"l_th_sq": l_eff_sq, "dE_total": delta_E_total(geom, efectivos, meas).dE_total}


def summarize_replicas(records, params, beam, meas, n_e=None):
    """Medias y errores estándar por paso contra el presupuesto de forma cerrada."""
    if not records:
        raise InvalidParameterError("no hay réplicas para resumir")
    perfil, geom, sigma_tilde, n_e = _condiciones(params, beam, meas, n_e)
    n_steps = min(len(r) for r in records)

    pasos = []
    for k in range(n_steps):
        del_paso = [r[k] for r in records]
        fila = {"step": k}
        for campo in CAMPOS_DE_PASO:
            valores = [getattr(reg, campo) for reg in del_paso]
            fila[campo] = math.fsum(valores) / len(valores)
            fila[f"{campo}_se"] = error_estandar(valores)
        fila["E_par"] = math.fsum(reg.before.E_par for reg in del_paso) / len(del_paso)
        fila["E_perp"] = math.fsum(reg.before.E_perp for reg in del_paso) / len(del_paso)
        fila["effective"] = _prediccion_efectiva(fila["E_par"], params, perfil, sigma_tilde)
        pasos.append(fila)

    return ReplicaSummary(
        n_replicas=len(records),
        n_steps=n_steps,
        sigma_tilde=sigma_tilde,
        n_e=n_e,
        prediction=delta_E_total(geom, params, meas),
        steps=tuple(pasos),
    )


def trajectory_rows(records):
    """Filas (replica, step, E_par, E_perp, measured_P, dE_total) tras cada patada."""
    return [
        {
            "replica": replica,
            "step": reg.step,
            "E_par": reg.after.E_par,
            "E_perp": reg.after.E_perp,
            "measured_P": reg.measured_P,
            "dE_total": reg.dE_total,
        }
        for replica, registros in enumerate(records)
        for reg in registros
    ]
