from rest_framework import serializers

from dprl.environments.envs import EnvConfig, EnvKind
from dprl.esd.dynamics import EsdParams
from dprl.policy.network import ACTIVATIONS
from dprl.training.trainer import AgentKind, TrainConfig
from dprl.utils.exceptions import ContractViolation

__all__ = [
    "EnvConfigSerializer",
    "EsdParamsSerializer",
    "TrainConfigSerializer",
    "ExperimentSectionSerializer",
    "SECTION_SERIALIZERS",
]


class PairField(serializers.ListField):
    child = serializers.IntegerField(min_value=0)

    def __init__(self, **kwargs):
        kwargs.setdefault("min_length", 2)
        kwargs.setdefault("max_length", 2)
        super().__init__(**kwargs)

    def to_internal_value(self, data):
        return tuple(super().to_internal_value(data))


class ChoiceListField(serializers.ListField):
    """A list of choices; a bare string is one choice, and `all` selects every choice."""

    def __init__(self, choices, **kwargs):
        self.all_choices = list(choices)
        kwargs["child"] = serializers.ChoiceField(choices=self.all_choices)
        kwargs.setdefault("allow_empty", False)
        super().__init__(**kwargs)

    def to_internal_value(self, data):
        if isinstance(data, str):
            data = self.all_choices if data in ("all", "both") else [data]
        elif isinstance(data, (list, tuple)) and any(item in ("all", "both") for item in data):
            data = self.all_choices
        values = super().to_internal_value(data)
        # de-duplicate, keep declaration order so outputs never depend on flag order
        return [choice for choice in self.all_choices if choice in values]


class DataclassSerializer(serializers.Serializer):
    """
    Validates one config section and returns the frozen dataclass it describes.

    Fields are optional; anything left out keeps the dataclass default. Invariants
    the dataclass enforces come back as field errors.
    """

    dataclass = None
    renamed = {}

    def validate(self, attrs):
        values = {self.renamed.get(key, key): value for key, value in attrs.items()}
        try:
            return self.dataclass(**values)
        except ContractViolation as exc:
            field = next((key for key, name in self.renamed.items() if name == exc.field), exc.field)
            raise serializers.ValidationError({field or "non_field_errors": [str(exc)]})


class EnvConfigSerializer(DataclassSerializer):
    dataclass = EnvConfig

    horizon = serializers.IntegerField(min_value=2, required=False)

    drift_onset_range = PairField(required=False)
    drift_base = serializers.FloatField(min_value=0.0, max_value=1.0, required=False)
    drift_noise_sd = serializers.FloatField(min_value=0.0, required=False)
    drift_ramp_noise_sd = serializers.FloatField(min_value=0.0, required=False)
    drift_peak = serializers.FloatField(min_value=0.0, max_value=1.0, required=False)

    hover_threshold = serializers.FloatField(min_value=0.0, max_value=1.0, required=False)
    hover_jitter = serializers.FloatField(min_value=0.0, required=False)
    hover_cross_range = PairField(required=False)
    hover_ramp_len = serializers.IntegerField(min_value=1, required=False)
    hover_peak = serializers.FloatField(min_value=0.0, max_value=1.0, required=False)
    hover_settle_noise_sd = serializers.FloatField(min_value=0.0, required=False)

    window_lo = serializers.IntegerField(min_value=1, required=False)
    window_hi = serializers.IntegerField(min_value=1, required=False)
    window_start = serializers.FloatField(min_value=0.0, max_value=1.0, required=False)
    window_end = serializers.FloatField(min_value=0.0, max_value=1.0, required=False)
    window_noise_sd = serializers.FloatField(min_value=0.0, required=False)

    sustain_lag = serializers.IntegerField(min_value=0, required=False)
    reward_hit = serializers.FloatField(required=False)
    reward_miss = serializers.FloatField(required=False)
    reward_transient = serializers.FloatField(required=False)


class EsdParamsSerializer(DataclassSerializer):
    dataclass = EsdParams

    alpha_up = serializers.FloatField(min_value=0.0, max_value=1.0, required=False)
    alpha_down = serializers.FloatField(min_value=0.0, max_value=1.0, required=False)
    beta = serializers.FloatField(min_value=0.0, max_value=1.0, required=False)
    clamp_output = serializers.BooleanField(required=False)


class TrainConfigSerializer(DataclassSerializer):
    dataclass = TrainConfig
    renamed = {"lambda": "lam"}

    episodes = serializers.IntegerField(min_value=0, required=False)
    gamma = serializers.FloatField(min_value=0.0, max_value=1.0, required=False)
    learn_rate = serializers.FloatField(min_value=0.0, required=False)
    adam_beta1 = serializers.FloatField(min_value=0.0, max_value=1.0, required=False)
    adam_beta2 = serializers.FloatField(min_value=0.0, max_value=1.0, required=False)
    adam_eps = serializers.FloatField(min_value=0.0, required=False)
    hidden = serializers.IntegerField(min_value=1, required=False)
    activation = serializers.ChoiceField(choices=ACTIVATIONS, required=False)
    normalize_returns = serializers.BooleanField(required=False)
    log_every = serializers.IntegerField(min_value=0, required=False)

    def get_fields(self):
        fields = super().get_fields()
        # `lambda` is a keyword, so it cannot be declared in the class body.
        fields["lambda"] = serializers.FloatField(min_value=0.0, required=False)
        return fields


class ExperimentSectionSerializer(serializers.Serializer):
    envs = ChoiceListField(choices=[kind.value for kind in EnvKind], required=False)
    agents = ChoiceListField(choices=[kind.value for kind in AgentKind], required=False)
    seeds = serializers.ListField(child=serializers.IntegerField(min_value=0), allow_empty=False, required=False)
    n_rollouts = serializers.IntegerField(min_value=1, required=False)
    threshold = serializers.FloatField(min_value=0.0, max_value=1.0, required=False)
    output_dir = serializers.CharField(required=False)
    demo_episodes = serializers.IntegerField(min_value=0, required=False, allow_null=True)

    def to_internal_value(self, data):
        seeds = data.get("seeds")
        if isinstance(seeds, int) and not isinstance(seeds, bool):
            data = dict(data, seeds=[seeds])
        return super().to_internal_value(data)


SECTION_SERIALIZERS = {
    "env": EnvConfigSerializer,
    "esd": EsdParamsSerializer,
    "train": TrainConfigSerializer,
    "experiment": ExperimentSectionSerializer,
}
