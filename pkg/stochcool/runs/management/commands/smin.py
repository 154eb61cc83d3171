from stochcool.boundary.services import s_min_sweep
from stochcool.runs.base import RunCommand
from stochcool.runs.services import escribir_csv, rango_geometrico


class Command(RunCommand):
    help = "Radio mínimo de haz s_min(l_th²) en el límite de muchos átomos."
    command = "smin"

    def correr(self, cfg, directorio):
        valores = rango_geometrico(cfg["l_th_sq_min"], cfg["l_th_sq_max"], cfg["points"])
        filas = [{"l_th_sq": l_sq, "s_min": s_min} for l_sq, s_min in s_min_sweep(valores)]
        escribir_csv(directorio / "smin.csv", ("l_th_sq", "s_min"), filas)
        self.stdout.write(f"{len(filas)} temperaturas, s_min de {filas[0]['s_min']:.6g} a {filas[-1]['s_min']:.6g}")
        return ["smin.csv"]
