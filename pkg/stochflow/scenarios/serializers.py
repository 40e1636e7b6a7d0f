"""
Scenario configuration schema.

Every section rejects keys it does not know. Validated data is the
resolved configuration: defaults filled in, and stable under another
round of validation.
"""
import os

import numpy as np
from rest_framework import serializers
from rest_framework.settings import api_settings

from stochflow.conf import settings
from stochflow.fields.catalog import CATALOG, GAUSSIAN, PROFILES
from stochflow.fields.domain import DOMAIN_KINDS
from stochflow.navierstokes.state import AUTO, VELOCITY_METHODS
from stochflow.recovery.brownian import GRADFORM, KERNEL

TRANSPORT_2D = "transport2d"
TRANSPORT_3D = "transport3d"
RECOVER = "recover"
NS = "ns"
DYNAMO = "dynamo"
DRIFTLESS = "driftless-verify"
MODES = (TRANSPORT_2D, TRANSPORT_3D, RECOVER, NS, DYNAMO, DRIFTLESS)

FIXED_DIMS = {TRANSPORT_2D: 2, TRANSPORT_3D: 3, DRIFTLESS: 2}
DEFAULT_DIMS = {RECOVER: 2, NS: 2, DYNAMO: 3}


class StrictSerializer(serializers.Serializer):

    def to_internal_value(self, data):
        if isinstance(data, dict):
            unknown = sorted(set(data) - set(self.fields))
            if unknown:
                raise serializers.ValidationError(
                    {key: ["Unknown key."] for key in unknown})
        return super(StrictSerializer, self).to_internal_value(data)


def positive(value):
    if not value > 0:
        raise serializers.ValidationError("Must be positive.")
    return value


class DomainSerializer(StrictSerializer):
    kind = serializers.ChoiceField(choices=DOMAIN_KINDS)
    dim = serializers.IntegerField(min_value=2, max_value=3, required=False)
    period = serializers.FloatField(default=2 * np.pi, validators=[positive])
    extent = serializers.FloatField(default=5.0, validators=[positive])


class FieldSpecSerializer(StrictSerializer):
    name = serializers.ChoiceField(choices=sorted(CATALOG), required=False)
    params = serializers.DictField(default=dict)
    time = serializers.FloatField(default=0.0)
    grid = serializers.CharField(required=False)

    def validate_grid(self, value):
        base = self.context.get("base_dir") or os.getcwd()
        path = value if os.path.isabs(value) else os.path.join(base, value)
        if not os.path.isfile(path):
            raise serializers.ValidationError(
                "Grid file %s does not exist." % value)
        return value

    def validate(self, attrs):
        if ("name" in attrs) == ("grid" in attrs):
            raise serializers.ValidationError(
                "Give exactly one of 'name' and 'grid'.")
        return attrs


class BlobSerializer(StrictSerializer):
    centers = serializers.ListField(
        child=serializers.ListField(child=serializers.FloatField(),
                                    min_length=2, max_length=2),
        min_length=1)
    radii = serializers.ListField(
        child=serializers.FloatField(validators=[positive]), min_length=1)
    circulations = serializers.ListField(child=serializers.FloatField(),
                                         min_length=1)
    profile = serializers.ChoiceField(choices=PROFILES, default=GAUSSIAN)

    def validate(self, attrs):
        n = len(attrs["centers"])
        if len(attrs["radii"]) != n or len(attrs["circulations"]) != n:
            raise serializers.ValidationError(
                "Each blob needs a center, a radius and a circulation.")
        return attrs


class PhysicsSerializer(StrictSerializer):
    nu = serializers.FloatField(required=False, validators=[positive])
    nu_m = serializers.FloatField(required=False, validators=[positive])


class TimeSerializer(StrictSerializer):
    horizon = serializers.FloatField(required=False, min_value=0.0)
    dt = serializers.FloatField(required=False, validators=[positive])
    dtau = serializers.FloatField(required=False, validators=[positive])
    window = serializers.ListField(child=serializers.FloatField(),
                                   min_length=2, max_length=2,
                                   required=False)
    n_times = serializers.IntegerField(min_value=2, default=5)

    def validate_window(self, value):
        if not value[1] > value[0] > 0:
            raise serializers.ValidationError("Needs 0 < t1 < t2.")
        return value


class SamplingSerializer(StrictSerializer):
    points = serializers.ListField(
        child=serializers.ListField(child=serializers.FloatField(),
                                    min_length=2, max_length=3),
        min_length=1, required=False)
    shape = serializers.ListField(
        child=serializers.IntegerField(min_value=2), min_length=2,
        max_length=3, required=False)


class MCSerializer(StrictSerializer):
    n_paths = serializers.IntegerField(min_value=2)
    seed = serializers.IntegerField(min_value=0, max_value=2 ** 64 - 1,
                                    default=0)
    stream = serializers.IntegerField(min_value=0, max_value=2 ** 32 - 1,
                                      default=0)
    antithetic = serializers.BooleanField(default=False)
    picard_iterations = serializers.IntegerField(min_value=1, required=False)
    velocity_method = serializers.ChoiceField(choices=VELOCITY_METHODS,
                                              default=AUTO)
    recovery_method = serializers.ChoiceField(choices=(KERNEL, GRADFORM),
                                              default=KERNEL)
    recovery_paths = serializers.IntegerField(min_value=2, required=False)

    def validate(self, attrs):
        if attrs["antithetic"] and attrs["n_paths"] % 2:
            raise serializers.ValidationError(
                {"n_paths": ["Antithetic sampling needs an even count."]})
        return attrs


class OutputSerializer(StrictSerializer):
    directory = serializers.CharField(required=False)
    plots = serializers.BooleanField(default=True)
    particles = serializers.IntegerField(min_value=0, default=0)


SECTIONS = ("physics", "time", "sampling", "output")


class ScenarioSerializer(StrictSerializer):
    schema_version = serializers.IntegerField(required=False)
    mode = serializers.ChoiceField(choices=MODES)
    domain = DomainSerializer()
    physics = PhysicsSerializer()
    velocity = FieldSpecSerializer(required=False)
    initial = FieldSpecSerializer(required=False)
    blobs = BlobSerializer(required=False)
    time = TimeSerializer()
    sampling = SamplingSerializer()
    mc = MCSerializer()
    output = OutputSerializer()
    oracle = serializers.BooleanField(default=False)

    def to_internal_value(self, data):
        if isinstance(data, dict):
            data = dict(data)
            for section in SECTIONS:
                data.setdefault(section, {})
        return super(ScenarioSerializer, self).to_internal_value(data)

    def validate_schema_version(self, value):
        if value != settings.SCENARIO_SCHEMA_VERSION:
            raise serializers.ValidationError(
                "Unsupported schema version %s; this build reads %s."
                % (value, settings.SCENARIO_SCHEMA_VERSION))
        return value

    def validate(self, attrs):
        attrs["schema_version"] = settings.SCENARIO_SCHEMA_VERSION
        mode = attrs["mode"]
        errors = {}

        def require(section, key, message=None):
            if key not in attrs.get(section, {}):
                errors.setdefault(section, {})[key] = [
                    message or "Required for mode %s." % mode]

        domain = attrs["domain"]
        dim = domain.get("dim")
        fixed = FIXED_DIMS.get(mode)
        if fixed and dim not in (None, fixed):
            errors["domain"] = {"dim": ["Mode %s is %dD." % (mode, fixed)]}
        domain["dim"] = dim = fixed or dim or DEFAULT_DIMS[mode]

        if mode == DYNAMO:
            require("physics", "nu_m")
        elif mode == DRIFTLESS:
            physics = attrs["physics"]
            if "nu" not in physics and "nu_m" not in physics:
                require("physics", "nu")
        elif mode != RECOVER:
            require("physics", "nu")

        if mode != RECOVER:
            require("time", "horizon")
        horizon = attrs["time"].get("horizon")
        if mode not in (NS, RECOVER) and horizon is not None and not (
                horizon > 0):
            errors.setdefault("time", {})["horizon"] = [
                "Must be positive for mode %s." % mode]
        if mode == NS:
            require("time", "dtau")
            require("sampling", "shape")
            if ("initial" in attrs) == ("blobs" in attrs):
                errors["initial"] = ["Give exactly one of 'initial' and "
                                     "'blobs'."]
        else:
            if mode != DRIFTLESS and "initial" not in attrs:
                errors["initial"] = ["Required for mode %s." % mode]
            require("sampling", "points")
            if "blobs" in attrs:
                errors["blobs"] = ["Only mode ns takes blobs."]
        if mode in (TRANSPORT_2D, TRANSPORT_3D, DYNAMO, DRIFTLESS) and (
                "velocity" not in attrs):
            errors["velocity"] = ["Required for mode %s." % mode]
        if mode == DRIFTLESS and len(attrs["sampling"].get("points", [])) > 1:
            errors.setdefault("sampling", {})["points"] = [
                "Mode driftless-verify starts every path at one point."]
        if "window" in attrs["time"] and mode != DYNAMO:
            errors.setdefault("time", {})["window"] = [
                "Only mode dynamo fits a growth rate."]

        sampling = attrs["sampling"]
        for point in sampling.get("points", []):
            if len(point) != dim:
                errors.setdefault("sampling", {})["points"] = [
                    "Points must be %dD." % dim]
                break
        if "shape" in sampling and len(sampling["shape"]) != dim:
            errors.setdefault("sampling", {})["shape"] = [
                "The grid shape must be %dD." % dim]
        if errors:
            raise serializers.ValidationError(errors)
        return attrs


def flatten_errors(detail, prefix=""):
    """Dotted field paths mapped to their messages."""
    if isinstance(detail, dict):
        flat = {}
        for key, value in detail.items():
            if key == api_settings.NON_FIELD_ERRORS_KEY:
                path = prefix or key
            else:
                path = "%s.%s" % (prefix, key) if prefix else key
            flat.update(flatten_errors(value, path))
        return flat
    if isinstance(detail, list) and detail and not isinstance(
            detail[0], (dict, list)):
        return {prefix: [str(message) for message in detail]}
    if isinstance(detail, list):
        flat = {}
        for index, item in enumerate(detail):
            flat.update(flatten_errors(item, "%s.%d" % (prefix, index)))
        return flat
    return {prefix: [str(detail)]}


def to_plain(data):
    """Validated data as plain dicts and lists, for JSON."""
    if isinstance(data, dict):
        return {key: to_plain(value) for key, value in data.items()}
    if isinstance(data, (list, tuple)):
        return [to_plain(value) for value in data]
    return data
