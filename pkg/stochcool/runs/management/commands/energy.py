from stochcool.energy.services import delta_E_total
from stochcool.runs.base import RunCommand
from stochcool.runs.presenters import lineas_presupuesto, veredicto
from stochcool.runs.services import escribir_json, resolver_haz, resolver_medicion, resolver_params
from stochcool.trap.services import natural_scales, scale_geometry


class Command(RunCommand):
    help = "Balance de energía de un paso de enfriamiento para una geometría (s, d)."
    command = "energy"

    def correr(self, cfg, directorio):
        params = resolver_params(cfg)
        scales = natural_scales(params)
        geom = scale_geometry(resolver_haz(cfg, params), scales)
        budget = delta_E_total(geom, params, resolver_medicion(cfg, params))

        self.stdout.write(f"s = {geom.s:.6g}  d = {geom.d:.6g}  l_th² = {scales.l_th_sq:.6g}  N = {params.n_atoms}")
        for linea in lineas_presupuesto(budget):
            self.stdout.write(linea)
        self.stdout.write(self.style.SUCCESS(f"El paso {veredicto(budget)}."))

        salida = budget.as_dict()
        salida.update({"s": geom.s, "d": geom.d, "l_th_sq": scales.l_th_sq, "n_atoms": params.n_atoms})
        escribir_json(directorio / "budget.json", salida)
        return ["budget.json"]
