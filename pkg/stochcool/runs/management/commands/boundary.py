from stochcool.boundary.services import boundary_curves_for_atoms
from stochcool.runs.base import RunCommand
from stochcool.runs.services import escribir_csv, rango, resolver_medicion, resolver_params

COLUMNAS = ("s", "d", "mode", "N", "l_th_sq", "sigma_mode")


class Command(RunCommand):
    help = "Frontera de enfriamiento d(s) por modo y por número de átomos, un CSV por curva."
    command = "boundary"

    def correr(self, cfg, directorio):
        params = resolver_params(cfg)
        meas = resolver_medicion(cfg, params)
        s_grid = rango(cfg["s_min"], cfg["s_max"], cfg["s_points"])
        n_atoms_list = cfg.get("n_atoms_list") or [params.n_atoms]

        archivos = []
        for mode in cfg["modes"]:
            curvas = boundary_curves_for_atoms(
                s_grid, mode, params, meas, n_atoms_list,
                workers=cfg.get("workers"),
                params_for=lambda n: resolver_params(cfg, n_atoms=n),
            )
            for curva in curvas:
                nombre = f"boundary_{mode}_N{curva.n_atoms}.csv"
                escribir_csv(directorio / nombre, COLUMNAS, curva.as_rows())
                archivos.append(nombre)
                if curva.is_empty:
                    self.stdout.write(self.style.WARNING(f"{mode}, N={curva.n_atoms}: sin región de enfriamiento"))
                else:
                    self.stdout.write(
                        f"{mode}, N={curva.n_atoms}: {len(curva.samples)} puntos, s_min ≈ {curva.s_min:.6g}"
                    )
        return archivos
