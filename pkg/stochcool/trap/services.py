import math

from scipy import constants

from .domain import ZETA_3, BeamGeometry, InvalidParameterError, NaturalScales, ScaledGeometry


def coth_half_inverse_temperature(kt_over_omega):
    """
    coth(ω / 2k_BT) = 1 + 2/expm1(ω/k_BT).

    La forma con expm1 no pierde dígitos a alta temperatura, donde
    coth → 2k_BT/ω y la resta directa cosh/sinh cancela.
    """
    if not (kt_over_omega > 0):
        raise InvalidParameterError(f"k_B·T/ω debe ser > 0 (recibido {kt_over_omega!r})")
    x = 1.0 / kt_over_omega
    if x > 700.0:
        # expm1 desborda; l_th² ya es 1 en doble precisión.
        return 1.0
    return 1.0 + 2.0 / math.expm1(x)


def l_th_sq_from_temperature(kt_over_omega):
    return coth_half_inverse_temperature(kt_over_omega)


def natural_scales(params):
    """
    Escalas naturales de la trampa.

    dx0, dp0: incertezas del estado fundamental (dx0·dp0 = ħ/2).
    L_th: extensión rms térmica de la nube, L_th = dx0·tanh(ω/2k_BT)^(-1/2).
    T0: temperatura de condensación en el límite termodinámico.
    """
    if params.units == "si":
        hbar, k_b = constants.hbar, constants.k
    else:
        hbar, k_b = 1.0, 1.0

    mass, omega = params.mass, params.omega
    dx0 = math.sqrt(hbar / (2.0 * mass * omega))
    dp0 = math.sqrt(hbar * mass * omega / 2.0)
    l_th = math.sqrt(coth_half_inverse_temperature(params.reduced_temperature))
    t0 = (hbar * omega / k_b) * (params.n_atoms / ZETA_3) ** (1.0 / 3.0)

    return NaturalScales(dx0=dx0, dp0=dp0, L_th=dx0 * l_th, l_th=l_th, T0=t0, hbar=hbar)


def scale_geometry(beam, scales):
    return ScaledGeometry(s=beam.r0 / scales.L_th, d=beam.offset / scales.L_th)


def beam_from_scaled(geom, scales, angle=0.0):
    """Inversa de scale_geometry; el centro del haz queda a `angle` del eje x."""
    radio = geom.d * scales.L_th
    return BeamGeometry(
        r0=geom.s * scales.L_th,
        x0=radio * math.cos(angle),
        y0=radio * math.sin(angle),
    )
