"""
Tipos del simulador de ensamble clásico.

Posiciones en unidades de dx0 y momentos en unidades de dp0: la energía por
eje queda (z̃² + p̃²)/4 en cuantos de ω.
"""
import math
from dataclasses import dataclass, field

import numpy as np

from stochcool.trap.domain import InvalidParameterError


@dataclass(frozen=True)
class EnergySnapshot:
    E_par: float
    E_perp: float
    V_par: float
    V_perp: float

    @property
    def T_par(self):
        return self.E_par - self.V_par

    @property
    def T_perp(self):
        return self.E_perp - self.V_perp

    @property
    def E_total(self):
        return self.E_par + self.E_perp


@dataclass
class EnsembleState:
    """
    N átomos clásicos. positions/momenta son (N, 3) con columnas (x, y, z);
    z es el eje del haz. phase acumula la evolución libre aplicada.
    """
    positions: np.ndarray
    momenta: np.ndarray
    rng: np.random.Generator = field(repr=False)
    phase: float = 0.0

    def __post_init__(self):
        if self.positions.shape != self.momenta.shape or self.positions.ndim != 2 or self.positions.shape[1] != 3:
            raise InvalidParameterError(
                f"positions y momenta deben ser (N, 3) (recibido {self.positions.shape}, {self.momenta.shape})"
            )

    @property
    def n_atoms(self):
        return self.positions.shape[0]

    def energies(self):
        z2 = self.positions ** 2
        p2 = self.momenta ** 2
        V_par = 0.25 * float(np.sum(z2[:, 2]))
        V_perp = 0.25 * float(np.sum(z2[:, :2]))
        return EnergySnapshot(
            E_par=V_par + 0.25 * float(np.sum(p2[:, 2])),
            E_perp=V_perp + 0.25 * float(np.sum(p2[:, :2])),
            V_par=V_par,
            V_perp=V_perp,
        )

    def total_pz(self):
        return float(np.sum(self.momenta[:, 2]))

    def copy(self):
        # El generador se comparte: la copia sigue consumiendo el mismo stream.
        return EnsembleState(
            positions=self.positions.copy(),
            momenta=self.momenta.copy(),
            rng=self.rng,
            phase=self.phase,
        )


@dataclass(frozen=True)
class BeamProfile:
    """Perfil w⊥ del haz con r0, x0, y0 en unidades de dx0."""
    r0: float
    x0: float = 0.0
    y0: float = 0.0

    @classmethod
    def from_geometry(cls, beam, scales):
        return cls(r0=beam.r0 / scales.dx0, x0=beam.x0 / scales.dx0, y0=beam.y0 / scales.dx0)

    def weights(self, positions):
        dx = positions[:, 0] - self.x0
        dy = positions[:, 1] - self.y0
        return np.exp(-(dx * dx + dy * dy) / (2.0 * self.r0 ** 2))

    def gradients(self, positions):
        """∇⊥w en unidades de 1/dx0, forma (N, 2)."""
        w = self.weights(positions)
        centro = np.array([self.x0, self.y0])
        return -(w / self.r0 ** 2)[:, None] * (positions[:, :2] - centro)


@dataclass(frozen=True)
class FeedbackStepRecord:
    """Un paso medición + patada. `after` se toma antes de la evolución libre."""
    step: int
    measured_P: float
    back_action: float
    kick_scale: float
    before: EnergySnapshot
    after: EnergySnapshot

    @property
    def dE_total(self):
        return self.after.E_total - self.before.E_total

    @property
    def dE_par(self):
        return self.after.E_par - self.before.E_par

    @property
    def dE_perp(self):
        return self.after.E_perp - self.before.E_perp

    @property
    def dV_par(self):
        return self.after.V_par - self.before.V_par

    @property
    def dT_par(self):
        return self.after.T_par - self.before.T_par


CAMPOS_DE_PASO = ("dE_total", "dE_par", "dE_perp", "dV_par", "dT_par")


@dataclass(frozen=True)
class ReplicaSummary:
    """
    Estadística por paso sobre las réplicas.

    steps[k] trae la media y el error estándar de cada campo de
    CAMPOS_DE_PASO, las energías medias antes del paso y la predicción de
    forma cerrada a la temperatura efectiva l_eff² = 2⟨E_par⟩/N (None si
    l_eff² <= 1). prediction es el presupuesto a la temperatura inicial.
    """
    n_replicas: int
    n_steps: int
    sigma_tilde: float
    n_e: float
    prediction: object
    steps: tuple = field(default_factory=tuple)

    def as_dict(self):
        return {
            "n_replicas": self.n_replicas,
            "n_steps": self.n_steps,
            "sigma_over_dp0": self.sigma_tilde,
            "n_e": self.n_e,
            "prediction": self.prediction.as_dict(),
            "steps": [dict(paso) for paso in self.steps],
        }


def error_estandar(valores):
    valores = np.asarray(valores, dtype=float)
    if valores.size < 2:
        return math.nan
    return float(np.std(valores, ddof=1) / math.sqrt(valores.size))
