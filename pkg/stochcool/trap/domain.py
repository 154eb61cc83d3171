"""
Tipos de valor del modelo físico: trampa + ensamble, escalas naturales y
geometría del haz de control.

Todos son inmutables (frozen) y se validan al construirse; un parámetro
no positivo levanta InvalidParameterError en vez de propagar NaN aguas abajo.
"""
import math
import numbers
from dataclasses import dataclass

import numpy as np
from scipy.special import zeta

UNIDADES_VALIDAS = ("trap", "si")

ZETA_3 = float(zeta(3.0))


class InvalidParameterError(ValueError):
    """Parámetro físico fuera de dominio (no positivo, N < 1, etc.)."""


def _exigir_positivo(nombre, valor):
    if not (isinstance(valor, numbers.Real) and math.isfinite(valor) and valor > 0):
        raise InvalidParameterError(f"{nombre} debe ser un número finito > 0 (recibido {valor!r})")


@dataclass(frozen=True)
class TrapEnsembleParams:
    """
    Trampa armónica isótropa + N átomos distinguibles en equilibrio térmico.

    units="trap": ħ = k_B = 1, temperature es k_B·T en las mismas unidades
    que omega (típicamente omega = mass = 1).
    units="si": omega en rad/s, mass en kg, temperature en K.
    """
    omega: float
    mass: float
    temperature: float
    n_atoms: int
    units: str = "trap"

    def __post_init__(self):
        _exigir_positivo("omega", self.omega)
        _exigir_positivo("mass", self.mass)
        _exigir_positivo("temperature", self.temperature)
        if isinstance(self.n_atoms, bool) or not isinstance(self.n_atoms, (int, np.integer)) or self.n_atoms < 1:
            raise InvalidParameterError(f"n_atoms debe ser un entero >= 1 (recibido {self.n_atoms!r})")
        if self.units not in UNIDADES_VALIDAS:
            raise InvalidParameterError(f"units debe ser uno de {UNIDADES_VALIDAS} (recibido {self.units!r})")

    @property
    def reduced_temperature(self):
        """k_B·T / (ħ·ω), adimensional."""
        if self.units == "trap":
            return self.temperature / self.omega
        from scipy import constants

        return constants.k * self.temperature / (constants.hbar * self.omega)

    @classmethod
    def from_reduced_temperature(cls, kt_over_omega, n_atoms):
        return cls(omega=1.0, mass=1.0, temperature=float(kt_over_omega), n_atoms=n_atoms)

    @classmethod
    def from_l_th_sq(cls, l_th_sq, n_atoms):
        """Inversa de l² = coth(ω/2k_BT): k_BT/ω = 1 / log((l²+1)/(l²−1))."""
        if not (math.isfinite(l_th_sq) and l_th_sq > 1):
            raise InvalidParameterError(f"l_th_sq debe ser > 1 (recibido {l_th_sq!r})")
        return cls.from_reduced_temperature(1.0 / math.log1p(2.0 / (l_th_sq - 1.0)), n_atoms)

    @classmethod
    def from_t_over_t0(cls, ratio, n_atoms):
        """Temperatura en múltiplos de T0 = (ω/k_B)·(N/ζ(3))^(1/3)."""
        _exigir_positivo("t_over_t0", ratio)
        return cls.from_reduced_temperature(ratio * (n_atoms / ZETA_3) ** (1.0 / 3.0), n_atoms)

    def with_atoms(self, n_atoms):
        return TrapEnsembleParams(self.omega, self.mass, self.temperature, n_atoms, self.units)


@dataclass(frozen=True)
class NaturalScales:
    dx0: float
    dp0: float
    L_th: float
    l_th: float
    T0: float
    hbar: float = 1.0

    @property
    def l_th_sq(self):
        return self.l_th * self.l_th


@dataclass(frozen=True)
class BeamGeometry:
    """
    Haz gaussiano de control: w⊥(x, y) = exp(−[(x−x0)² + (y−y0)²] / (2·r0²)).

    Con esta normalización ∫w⊥² dA = π·r0² y |∇w⊥|² = w⊥²·ρ'²/r0⁴, que es
    lo que usan todas las fórmulas cerradas de energía.
    """
    r0: float
    x0: float = 0.0
    y0: float = 0.0

    def __post_init__(self):
        _exigir_positivo("r0", self.r0)
        if not (math.isfinite(self.x0) and math.isfinite(self.y0)):
            raise InvalidParameterError("x0 e y0 deben ser finitos")

    @property
    def offset(self):
        return math.hypot(self.x0, self.y0)

    def intensity_area(self):
        return math.pi * self.r0 ** 2

    def profile(self, x, y):
        return np.exp(-((x - self.x0) ** 2 + (y - self.y0) ** 2) / (2.0 * self.r0 ** 2))

    def gradient(self, x, y):
        w = self.profile(x, y)
        return -w * (x - self.x0) / self.r0 ** 2, -w * (y - self.y0) / self.r0 ** 2


@dataclass(frozen=True)
class ScaledGeometry:
    """(s, d): radio del haz y distancia del centro al eje, en unidades de L_th."""
    s: float
    d: float = 0.0

    def __post_init__(self):
        if not (self.s > 0):
            raise InvalidParameterError(f"s debe ser > 0 (recibido {self.s!r})")
        if self.s * self.s == 0:
            raise InvalidParameterError(f"s = {self.s!r} es tan chico que s² se anula en punto flotante")
        if not (math.isfinite(self.d) and self.d >= 0):
            raise InvalidParameterError(f"d debe ser finito y >= 0 (recibido {self.d!r})")
