from dataclasses import dataclass, field
from enum import Enum

TOL_ROOT = 1e-10
TOL_D = 1e-8
D_INICIAL = 1.0
D_MAX = 1e3
PUNTOS_MUESTREO = 32
MAX_ITERACIONES = 200


class BoundaryMode(str, Enum):
    LONGITUDINAL_ONLY = "longitudinal_only"
    TOTAL = "total"
    ASYMPTOTIC = "asymptotic"


class NoCoolingDomainError(ValueError):
    """No existe geometría que enfríe (l_th² ≤ 2, o s bajo s_min)."""


class NonMonotoneBoundaryError(RuntimeError):
    """ΔE(s, ·) cambia de signo más de una vez: la frontera no es única."""

    def __init__(self, s, cambios):
        self.s = s
        self.cambios = cambios
        super().__init__(f"ΔE(s={s!r}, d) cambia de signo {cambios} veces en el intervalo sondeado")


@dataclass(frozen=True)
class BoundaryCurve:
    """
    Frontera ΔE(s, d) = 0 muestreada en s creciente.

    Bajo la curva (d menor) el paso enfría. s_min es el s más chico con
    enfriamiento en el eje; s_min_refined indica si salió de bisección en s
    o es solo el primer punto de la grilla.
    """
    mode: BoundaryMode
    samples: tuple = field(default_factory=tuple)
    s_min: float | None = None
    n_atoms: int | None = None
    l_th_sq: float | None = None
    sigma_mode: str = "optimal"
    s_min_refined: bool = False

    @property
    def is_empty(self):
        return not self.samples

    def is_monotone(self):
        ds = [d for _, d in self.samples]
        return all(b >= a for a, b in zip(ds, ds[1:]))

    def as_rows(self):
        modo = BoundaryMode(self.mode).value
        return [
            {
                "s": s,
                "d": d,
                "mode": modo,
                "N": self.n_atoms,
                "l_th_sq": self.l_th_sq,
                "sigma_mode": self.sigma_mode,
            }
            for s, d in self.samples
        ]
