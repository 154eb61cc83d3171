from stochcool.energy.services import budget_grid
from stochcool.runs.base import RunCommand
from stochcool.runs.services import escribir_csv, rango, resolver_medicion, resolver_params

COLUMNAS = (
    "s", "d", "mean_nw", "dV_par", "dT_par_meas", "dT_par_cool", "dT_par_fluct", "dE_par", "dE_perp", "dE_total",
)


class Command(RunCommand):
    help = "Tabla del balance de energía sobre una grilla (s, d)."
    command = "sweep"

    def correr(self, cfg, directorio):
        s_values = cfg.get("s_values") or rango(cfg["s_min"], cfg["s_max"], cfg["s_points"])
        d_values = cfg.get("d_values") or rango(cfg["d_min"], cfg["d_max"], cfg["d_points"])
        params = resolver_params(cfg)
        celdas = budget_grid(s_values, d_values, params, resolver_medicion(cfg, params), workers=cfg.get("workers"))

        filas = []
        for s, d, budget in celdas:
            fila = {clave: valor for clave, valor in budget.as_dict().items() if clave in COLUMNAS}
            fila.update(s=float(s), d=float(d))
            filas.append(fila)
        escribir_csv(directorio / "budget_grid.csv", COLUMNAS, filas)

        enfrian = sum(1 for fila in filas if fila["dE_total"] < 0)
        self.stdout.write(f"{len(filas)} celdas, {enfrian} enfrían")
        return ["budget_grid.csv"]
