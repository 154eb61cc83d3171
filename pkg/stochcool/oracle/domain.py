"""
Tipos del oráculo de verificación.

El oráculo trabaja en unidades de oscilador ħ = m = ω = 1, donde
dx0² = dp0² = 1/2, L² = l_th²/2 y ⟨p²⟩ = l_th²/2. Las energías quedan
igual en cuantos de ω, así que se comparan directo con las formas cerradas.
"""
import math
from dataclasses import dataclass, field

import numpy as np

# Paso relativo de las diferencias centrales (en unidades de la escala propia).
PASO_RELATIVO = 2e-3


class OracleConstructionError(RuntimeError):
    """El kernel térmico no pasa sus propios invariantes (traza, ⟨z²⟩, ⟨p²⟩)."""


class QuadratureConvergenceError(RuntimeError):
    """La cuadratura no converge al duplicar el orden."""


def _richardson(d_h, d_h2):
    """Extrapolación de Richardson para un esquema de orden h²."""
    return (4.0 * d_h2 - d_h) / 3.0


@dataclass(frozen=True)
class ThermalKernel1D:
    """
    Matriz densidad térmica de un oscilador 1D en representación de posición:

        ρ(z, z') = (2πL²)^(-1/2) · exp[−(z+z')²/(8L²) − (p2/2)·(z−z')²]

    con L² = ⟨z²⟩ y p2 = ⟨p²⟩. nodes/weights definen la regla trapezoidal
    sobre la que se integran las densidades.
    """
    L: float
    p2: float
    nodes: np.ndarray = field(repr=False, compare=False)
    weights: np.ndarray = field(repr=False, compare=False)

    def __call__(self, z, zp):
        z, zp = np.asarray(z, dtype=float), np.asarray(zp, dtype=float)
        suma, resta = z + zp, z - zp
        return np.exp(-suma ** 2 / (8.0 * self.L ** 2) - 0.5 * self.p2 * resta ** 2) / math.sqrt(
            2.0 * math.pi * self.L ** 2
        )

    def density(self, z):
        return self(z, z)

    def density_curvature(self, z):
        """n''(z) por segunda diferencia central con Richardson."""
        z = np.asarray(z, dtype=float)
        h = PASO_RELATIVO * self.L

        def segunda(paso):
            return (self.density(z + paso) - 2.0 * self.density(z) + self.density(z - paso)) / paso ** 2

        return _richardson(segunda(h), segunda(0.5 * h))

    def kinetic_density(self, z):
        """τ(z) = ∂z∂z'ρ(z, z') en la diagonal; ∫τ dz = ⟨p²⟩."""
        z = np.asarray(z, dtype=float)
        h = PASO_RELATIVO / math.sqrt(self.p2)

        def mixta(paso):
            return (
                self(z + paso, z + paso) - self(z + paso, z - paso)
                - self(z - paso, z + paso) + self(z - paso, z - paso)
            ) / (4.0 * paso ** 2)

        return _richardson(mixta(h), mixta(0.5 * h))

    def integrate(self, valores):
        return float(np.dot(self.weights, valores))

    def trace(self):
        return self.integrate(self.density(self.nodes))

    def second_moment(self):
        return self.integrate(self.nodes ** 2 * self.density(self.nodes))

    def momentum_second_moment(self):
        return self.integrate(self.kinetic_density(self.nodes))


@dataclass(frozen=True)
class MomentTable:
    """
    Momentos de una sola partícula en el estado térmico.

    w_moments[k] = ⟨w^k⟩ y grad_moments[k] = ⟨w^k·ρ'²⟩/r0⁴ (k = 2, 4, 6),
    promediados sobre la densidad transversal. Los longitudinales salen del
    kernel: z2 = ∫z²n, p2 = ∫τ, z2_curvature = ∫z²n'', curvature = ∫n'',
    odd = ∫z·n.
    """
    w_moments: dict
    grad_moments: dict
    z2: float
    p2: float
    z2_curvature: float
    curvature: float
    odd: float
    order: int


@dataclass(frozen=True)
class TermCheck:
    check: str
    term: str
    achieved: float
    required: float
    passed: bool
    point: dict = field(default_factory=dict)

    def as_dict(self):
        return {
            "check": self.check,
            "term": self.term,
            "achieved": self.achieved,
            "required": self.required,
            "passed": self.passed,
            "point": dict(self.point),
        }


@dataclass(frozen=True)
class VerificationReport:
    checks: tuple = field(default_factory=tuple)

    @property
    def passed(self):
        return all(c.passed for c in self.checks)

    def failures(self):
        return [c for c in self.checks if not c.passed]

    def as_dict(self):
        return {
            "passed": self.passed,
            "n_checks": len(self.checks),
            "n_failures": len(self.failures()),
            "checks": [c.as_dict() for c in self.checks],
        }
