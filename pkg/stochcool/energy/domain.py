import math
from dataclasses import dataclass, field

from stochcool.trap.domain import InvalidParameterError

MODOS_SIGMA = ("explicit", "optimal")


@dataclass(frozen=True)
class MeasurementSetting:
    """
    Resolución σ de la medición del momento colectivo.

    sigma va en las unidades de momento de los parámetros en uso (dp0 define
    la escala); en modo "optimal" se ignora y se resuelve a dp0·sqrt(⟨N_w⟩).
    """
    mode: str = "optimal"
    sigma: float | None = None

    def __post_init__(self):
        if self.mode not in MODOS_SIGMA:
            raise InvalidParameterError(f"mode debe ser uno de {MODOS_SIGMA} (recibido {self.mode!r})")
        if self.mode == "explicit" and not (self.sigma is not None and math.isfinite(self.sigma) and self.sigma > 0):
            raise InvalidParameterError(f"sigma explícito debe ser > 0 (recibido {self.sigma!r})")

    @classmethod
    def optimal(cls):
        return cls(mode="optimal")

    @classmethod
    def explicit(cls, sigma):
        return cls(mode="explicit", sigma=sigma)

    def resolve(self, mean_nw, scales):
        """σ/dp0 para la geometría en uso."""
        if self.mode == "optimal":
            return math.sqrt(mean_nw)
        return self.sigma / scales.dp0


@dataclass(frozen=True)
class EnergyBudget:
    """
    Balance de energía de un paso de enfriamiento, en cuantos de ω.

    ΔV⊥ es idénticamente cero y no tiene campo.
    """
    mean_nw: float
    sigma_tilde: float
    dV_par: float
    dT_par_meas: float
    dT_par_cool: float
    dT_par_fluct: float
    dE_perp_terms: tuple = field(default_factory=tuple)

    @property
    def dE_par(self):
        return self.dV_par + self.dT_par_meas + self.dT_par_cool + self.dT_par_fluct

    @property
    def dE_perp(self):
        return math.fsum(self.dE_perp_terms)

    @property
    def dE_total(self):
        return self.dE_par + self.dE_perp

    def as_dict(self):
        return {
            "mean_nw": self.mean_nw,
            "sigma_over_dp0": self.sigma_tilde,
            "dV_par": self.dV_par,
            "dT_par_meas": self.dT_par_meas,
            "dT_par_cool": self.dT_par_cool,
            "dT_par_fluct": self.dT_par_fluct,
            "dE_perp_terms": list(self.dE_perp_terms),
            "dE_par": self.dE_par,
            "dE_perp": self.dE_perp,
            "dE_total": self.dE_total,
        }
