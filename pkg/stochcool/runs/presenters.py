"""
Texto para stdout de los comandos. No calcula nada: sólo da forma a lo que
devuelven los servicios.
"""

# ---------------------------------------------------------------------------
# Presupuesto de energía
# ---------------------------------------------------------------------------

_FILAS_PRESUPUESTO = (
    ("⟨N_w⟩", "mean_nw"),
    ("σ/dp0", "sigma_over_dp0"),
    ("ΔV∥", "dV_par"),
    ("ΔT∥ medición", "dT_par_meas"),
    ("ΔT∥ enfriamiento", "dT_par_cool"),
    ("ΔT∥ fluctuación", "dT_par_fluct"),
    ("ΔE∥", "dE_par"),
    ("ΔE⊥", "dE_perp"),
    ("ΔE", "dE_total"),
)


def lineas_presupuesto(budget):
    datos = budget.as_dict()
    ancho = max(len(etiqueta) for etiqueta, _ in _FILAS_PRESUPUESTO)
    lineas = [f"{etiqueta:<{ancho}}  {datos[clave]: .10g}" for etiqueta, clave in _FILAS_PRESUPUESTO]
    for i, termino in enumerate(datos["dE_perp_terms"], start=1):
        lineas.append(f"{'  término ' + str(i):<{ancho}}  {termino: .10g}")
    return lineas


def veredicto(budget):
    if budget.dE_total < 0:
        return "enfría"
    if budget.dE_total > 0:
        return "calienta"
    return "neutro"


# ---------------------------------------------------------------------------
# Verificación
# ---------------------------------------------------------------------------

def lineas_verificacion(report):
    lineas = [f"Chequeos: {len(report.checks)}  fallidos: {len(report.failures())}"]
    for chequeo in report.failures():
        lineas.append(
            f"  FALLA {chequeo.check}/{chequeo.term}: {chequeo.achieved:.3e} > {chequeo.required:.1e} en {chequeo.point}"
        )
    return lineas


# ---------------------------------------------------------------------------
# Simulación
# ---------------------------------------------------------------------------

def lineas_simulacion(summary):
    lineas = [
        f"Réplicas: {summary.n_replicas}  pasos: {summary.n_steps}  σ/dp0 = {summary.sigma_tilde:.6g}  N_e = {summary.n_e:.6g}",
        f"Forma cerrada (paso 1): ΔE = {summary.prediction.dE_total:.6g}",
    ]
    for paso in summary.steps:
        lineas.append(
            f"  paso {paso['step'] + 1}: ΔE = {paso['dE_total']:.6g} ± {paso['dE_total_se']:.2g}"
            f"  ⟨E∥⟩ = {paso['E_par']:.6g}"
        )
    return lineas
