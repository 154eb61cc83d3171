from rest_framework import serializers

from stochcool.boundary.domain import BoundaryMode
from stochcool.energy.domain import MODOS_SIGMA
from stochcool.trap.domain import UNIDADES_VALIDAS

CAMPOS_TRAP = ("l_th_sq", "t_over_t0", "reduced_temperature", "s", "d")
CAMPOS_SI = ("omega", "mass", "temperature", "r0", "x0", "y0")
CAMPOS_TEMPERATURA_TRAP = ("l_th_sq", "t_over_t0", "reduced_temperature")


def _mayor_que_cero(valor):
    if not valor > 0:
        raise serializers.ValidationError("debe ser > 0")


def _positivo(**kwargs):
    return serializers.FloatField(required=False, allow_null=True, default=None, validators=[_mayor_que_cero], **kwargs)


def _no_negativo(**kwargs):
    return serializers.FloatField(required=False, allow_null=True, default=None, min_value=0.0, **kwargs)


class RunConfigSerializer(serializers.Serializer):
    """
    Config común a todos los comandos.

    units="trap" lleva la temperatura en una sola de l_th_sq / t_over_t0 /
    reduced_temperature y la geometría en (s, d); units="si" lleva omega,
    mass, temperature y el haz en metros. Mezclar campos de ambos sistemas
    es un error.
    """
    # Cada subclase decide qué bloques exige.
    requiere_temperatura = True
    requiere_geometria = True

    units = serializers.ChoiceField(choices=UNIDADES_VALIDAS, default="trap")

    l_th_sq = _positivo()
    t_over_t0 = _positivo()
    reduced_temperature = _positivo()
    s = _positivo()
    d = _no_negativo()

    omega = _positivo()
    mass = _positivo()
    temperature = _positivo()
    r0 = _positivo()
    x0 = serializers.FloatField(required=False, allow_null=True, default=None)
    y0 = serializers.FloatField(required=False, allow_null=True, default=None)

    n_atoms = serializers.IntegerField(required=False, allow_null=True, default=None, min_value=1)
    sigma_mode = serializers.ChoiceField(choices=MODOS_SIGMA, default="optimal")
    sigma = _positivo()
    seed = serializers.IntegerField(default=0, min_value=0)
    workers = serializers.IntegerField(required=False, allow_null=True, default=None, min_value=1)
    output_dir = serializers.CharField(required=False, allow_null=True, default=None)
    run_name = serializers.CharField(required=False, allow_null=True, default=None)

    def validate(self, attrs):
        ajenos = CAMPOS_SI if attrs["units"] == "trap" else CAMPOS_TRAP
        for campo in ajenos:
            if attrs.get(campo) is not None:
                raise serializers.ValidationError({campo: f"no corresponde a units={attrs['units']!r}"})

        if self.requiere_temperatura:
            if attrs.get("n_atoms") is None:
                raise serializers.ValidationError({"n_atoms": "requerido"})
            if attrs["units"] == "trap":
                dados = [c for c in CAMPOS_TEMPERATURA_TRAP if attrs.get(c) is not None]
                if len(dados) != 1:
                    raise serializers.ValidationError(
                        {"l_th_sq": f"dar exactamente uno de {CAMPOS_TEMPERATURA_TRAP} (recibido {dados})"}
                    )
            else:
                for campo in ("omega", "mass", "temperature"):
                    if attrs.get(campo) is None:
                        raise serializers.ValidationError({campo: "requerido con units='si'"})

        if self.requiere_geometria:
            requeridos = ("s",) if attrs["units"] == "trap" else ("r0",)
            for campo in requeridos:
                if attrs.get(campo) is None:
                    raise serializers.ValidationError({campo: "requerido"})

        if attrs["sigma_mode"] == "explicit" and attrs.get("sigma") is None:
            raise serializers.ValidationError({"sigma": "requerido con sigma_mode='explicit'"})
        return attrs


class EnergyConfigSerializer(RunConfigSerializer):
    pass


class BoundaryConfigSerializer(RunConfigSerializer):
    requiere_geometria = False

    modes = serializers.ListField(
        child=serializers.ChoiceField(choices=[m.value for m in BoundaryMode]),
        default=[BoundaryMode.TOTAL.value],
        allow_empty=False,
    )
    s_min = serializers.FloatField(default=0.5, min_value=0.0)
    s_max = serializers.FloatField(default=5.0, min_value=0.0)
    s_points = serializers.IntegerField(default=19, min_value=1)
    n_atoms_list = serializers.ListField(
        child=serializers.IntegerField(min_value=1), required=False, allow_null=True, default=None
    )

    def validate(self, attrs):
        attrs = super().validate(attrs)
        if not attrs["s_max"] > attrs["s_min"] > 0:
            raise serializers.ValidationError({"s_max": "se requiere 0 < s_min < s_max"})
        return attrs


class SminConfigSerializer(RunConfigSerializer):
    requiere_temperatura = False
    requiere_geometria = False

    l_th_sq_min = serializers.FloatField(default=2.5)
    l_th_sq_max = serializers.FloatField(default=2e4)
    points = serializers.IntegerField(default=50, min_value=1)

    def validate(self, attrs):
        attrs = super().validate(attrs)
        if not attrs["l_th_sq_max"] >= attrs["l_th_sq_min"] > 2.0:
            raise serializers.ValidationError({"l_th_sq_min": "se requiere 2 < l_th_sq_min <= l_th_sq_max"})
        return attrs


class VerifyConfigSerializer(RunConfigSerializer):
    requiere_temperatura = False
    requiere_geometria = False

    quick = serializers.BooleanField(default=False)


class SimulateConfigSerializer(RunConfigSerializer):
    replicas = serializers.IntegerField(default=100, min_value=1)
    steps = serializers.IntegerField(default=1, min_value=1)
    inter_step_phase = serializers.FloatField(required=False, allow_null=True, default=None)
    n_e = _positivo()


class SweepConfigSerializer(RunConfigSerializer):
    requiere_geometria = False

    s_values = serializers.ListField(child=serializers.FloatField(min_value=0.0), required=False, allow_null=True, default=None)
    s_min = serializers.FloatField(default=0.5, min_value=0.0)
    s_max = serializers.FloatField(default=5.0, min_value=0.0)
    s_points = serializers.IntegerField(default=10, min_value=1)
    d_values = serializers.ListField(child=serializers.FloatField(min_value=0.0), required=False, allow_null=True, default=None)
    d_min = serializers.FloatField(default=0.0, min_value=0.0)
    d_max = serializers.FloatField(default=3.0, min_value=0.0)
    d_points = serializers.IntegerField(default=7, min_value=1)

    def validate(self, attrs):
        attrs = super().validate(attrs)
        if attrs["units"] != "trap":
            raise serializers.ValidationError({"units": "sweep recorre (s, d) y sólo acepta units='trap'"})
        if attrs.get("s_values") is None and not attrs["s_max"] >= attrs["s_min"] > 0:
            raise serializers.ValidationError({"s_min": "se requiere 0 < s_min <= s_max"})
        if attrs.get("s_values") is not None and not all(s > 0 for s in attrs["s_values"]):
            raise serializers.ValidationError({"s_values": "todos los s deben ser > 0"})
        if attrs.get("d_values") is None and not attrs["d_max"] >= attrs["d_min"]:
            raise serializers.ValidationError({"d_min": "se requiere d_min <= d_max"})
        return attrs


# Un comando nuevo = una entrada acá.
SERIALIZADORES = {
    "energy": EnergyConfigSerializer,
    "boundary": BoundaryConfigSerializer,
    "smin": SminConfigSerializer,
    "verify": VerifyConfigSerializer,
    "simulate": SimulateConfigSerializer,
    "sweep": SweepConfigSerializer,
}
