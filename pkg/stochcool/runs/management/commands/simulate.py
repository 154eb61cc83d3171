from stochcool.runs.base import RunCommand
from stochcool.runs.presenters import lineas_simulacion
from stochcool.runs.services import escribir_csv, escribir_json, resolver_haz, resolver_medicion, resolver_params
from stochcool.simulation.services import run_replicas, summarize_replicas, trajectory_rows

COLUMNAS = ("replica", "step", "E_par", "E_perp", "measured_P", "dE_total")


class Command(RunCommand):
    help = "Monte Carlo del protocolo de enfriamiento sobre un ensamble clásico de N átomos."
    command = "simulate"

    def correr(self, cfg, directorio):
        params = resolver_params(cfg)
        beam = resolver_haz(cfg, params)
        meas = resolver_medicion(cfg, params)
        registros = run_replicas(
            params,
            beam,
            meas,
            n_steps=cfg["steps"],
            n_replicas=cfg["replicas"],
            workers=cfg.get("workers"),
            inter_step_phase=cfg.get("inter_step_phase"),
            seed=cfg["seed"],
            n_e=cfg.get("n_e"),
        )
        resumen = summarize_replicas(registros, params, beam, meas, n_e=cfg.get("n_e"))

        escribir_csv(directorio / "trajectories.csv", COLUMNAS, trajectory_rows(registros))
        escribir_json(directorio / "summary.json", resumen.as_dict())
        for linea in lineas_simulacion(resumen):
            self.stdout.write(linea)
        return ["trajectories.csv", "summary.json"]
