"""Flat key-value experiment configuration: dotted section names, one
``key = value`` pair per line, '#' comments, unknown keys rejected."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ConfigurationError
from .grids import GridSpec, SymbolGrid, sample_symbol
from .multipliers import (MultiplierSymbol, constant_multiplier,
                          coordinate_multiplier, gaussian_multiplier,
                          identity_multiplier, laplacian_multiplier,
                          power_multiplier)
from .nonlinear import (TimeProfile, constant_profile, exp_decay_profile,
                        power_decay_profile)

__all__ = ["ExperimentConfig", "parse_config", "parse_config_text",
           "EXPERIMENT_KINDS"]

EXPERIMENT_KINDS = (
    "heat_sweep",
    "schrodinger_sweep",
    "wave_sweep",
    "multiplier_bound",
    "nonlinear_heat",
    "nonlinear_wave",
)

# key -> (type tag, default); None default means required
_COMMON = {
    "experiment.kind": ("str", None),
    "seed": ("int", 0),
    "output.prefix": ("str", ""),
    "theta.d": ("int", 2),
    "theta.theta0": ("float", 1.0),
    "grid.half_width": ("float", 12.0),
    "grid.n": ("int", 256),
}

_SCHEMAS = {
    "heat_sweep": {
        "problem.alpha": ("float", 1.0),
        "problem.sigma": ("str", "power:lam=2"),
        "problem.p": ("float", 4.0 / 3.0),
        "problem.q": ("float", 4.0),
        "problem.t_min": ("float", 10.0),
        "problem.t_max": ("float", 1000.0),
        "problem.t_samples": ("int", 17),
        "data.u0": ("str", "gaussian:width=1"),
        "mt.method": ("str", "closed-form"),
    },
    "multiplier_bound": {
        "bound.g": ("str", "gaussian:scale=1"),
        "bound.p": ("float", 4.0 / 3.0),
        "bound.q": ("float", 4.0),
        "bound.samples": ("int", 50),
    },
    "nonlinear_heat": {
        "problem.p": ("int", 2),
        "problem.h": ("str", "constant:value=1"),
        "problem.A": ("str", "identity"),
        "problem.T": ("float", None),
        "data.u0": ("str", None),
        "constants.c": ("float", math.sqrt(2.0)),
        "constants.c1": ("float", math.sqrt(2.0)),
        "constants.delta": ("float", 1.0),
        "constants.c2": ("float", 1.0),
        "picard.steps": ("int", 200),
        "picard.tol": ("float", 1e-8),
        "run.override_window": ("bool", False),
    },
}
_SCHEMAS["schrodinger_sweep"] = dict(_SCHEMAS["heat_sweep"])
_SCHEMAS["schrodinger_sweep"].update({
    "problem.p": ("float", 2.0), "problem.q": ("float", 2.0),
    "problem.alpha": ("float", 1.0),
})
_SCHEMAS["wave_sweep"] = dict(_SCHEMAS["heat_sweep"])
_SCHEMAS["wave_sweep"].update({
    "problem.alpha": ("float", 1.5),
    "data.u0": ("str", "power_gaussian:power=2,width=1"),
    "data.u1": ("str", "power_gaussian:power=2,width=1"),
})
_SCHEMAS["nonlinear_wave"] = dict(_SCHEMAS["nonlinear_heat"])
_SCHEMAS["nonlinear_wave"].update({
    "data.u1": ("str", "constant:value=0"),
})


def _coerce(key, tag, raw):
    try:
        if tag == "int":
            return int(raw)
        if tag == "float":
            return float(raw)
        if tag == "bool":
            low = raw.strip().lower()
            if low in ("true", "1", "yes"):
                return True
            if low in ("false", "0", "no"):
                return False
            raise ValueError(raw)
        return raw.strip()
    except ValueError:
        raise ConfigurationError(f"key '{key}': cannot parse '{raw}' as {tag}")


@dataclass
class ExperimentConfig:
    """Resolved experiment description, echoed verbatim into every report."""

    kind: str
    values: dict

    def __getitem__(self, key):
        return self.values[key]

    def get(self, key, default=None):
        return self.values.get(key, default)

    def header_lines(self):
        return [f"{k} = {self.values[k]}" for k in sorted(self.values)]


def parse_config_text(text: str) -> ExperimentConfig:
    raw = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigurationError(
                f"line {lineno}: expected 'key = value', got '{stripped}'")
        key, val = stripped.split("=", 1)
        key = key.strip()
        if key in raw:
            raise ConfigurationError(f"line {lineno}: duplicate key '{key}'")
        raw[key] = val.strip()

    kind = raw.get("experiment.kind")
    if kind is None:
        raise ConfigurationError("missing required key 'experiment.kind'")
    if kind not in EXPERIMENT_KINDS:
        raise ConfigurationError(
            f"unknown experiment kind '{kind}'; choose from {EXPERIMENT_KINDS}")

    schema = dict(_COMMON)
    schema.update(_SCHEMAS[kind])
    unknown = set(raw) - set(schema)
    if unknown:
        raise ConfigurationError(
            f"unknown config key '{sorted(unknown)[0]}' for experiment '{kind}'")
    values = {}
    for key, (tag, default) in schema.items():
        if key in raw:
            values[key] = _coerce(key, tag, raw[key])
        elif default is None and key != "experiment.kind":
            raise ConfigurationError(f"missing required key '{key}'")
        else:
            values[key] = kind if key == "experiment.kind" else default
    if not values["output.prefix"]:
        values["output.prefix"] = kind
    return ExperimentConfig(kind, values)


def parse_config(path) -> ExperimentConfig:
    with open(path, "r") as fh:
        return parse_config_text(fh.read())


def _parse_spec_string(spec: str):
    """'family:key=val,key=val' -> (family, params dict)."""
    if ":" in spec:
        family, rest = spec.split(":", 1)
        params = {}
        for item in rest.split(","):
            if not item.strip():
                continue
            if "=" not in item:
                raise ConfigurationError(
                    f"bad parameter '{item}' in spec '{spec}'")
            k, v = item.split("=", 1)
            params[k.strip()] = v.strip()
        return family.strip(), params
    return spec.strip(), {}


def build_symbol(spec_string: str, grid: GridSpec) -> SymbolGrid:
    """Build a symbol from a config string like 'gaussian:width=1,scale=0.1'.

    The optional ``scale`` parameter multiplies the sampled values.
    """
    family, params = _parse_spec_string(spec_string)
    scale = float(params.pop("scale", 1.0))
    typed = {}
    for k, v in params.items():
        if k in ("center", "wavevector"):
            typed[k] = [float(x) for x in v.split()] if " " in v else float(v)
        else:
            typed[k] = float(v)
    sym = sample_symbol(family, grid, **typed)
    if scale != 1.0:
        sym.values *= scale
    return sym


def build_multiplier(spec_string: str) -> MultiplierSymbol:
    family, params = _parse_spec_string(spec_string)
    try:
        if family == "power":
            return power_multiplier(float(params.pop("lam")))
        if family == "laplacian":
            return laplacian_multiplier()
        if family == "identity":
            return identity_multiplier()
        if family == "constant":
            return constant_multiplier(float(params.pop("value")))
        if family == "gaussian":
            return gaussian_multiplier(float(params.pop("scale", 1.0)))
        if family == "coordinate":
            return coordinate_multiplier(int(params.pop("axis")))
    except KeyError as exc:
        raise ConfigurationError(
            f"multiplier '{family}' is missing parameter {exc}")
    raise ConfigurationError(f"unknown multiplier family '{family}'")


def build_profile(spec_string: str) -> TimeProfile:
    family, params = _parse_spec_string(spec_string)
    try:
        if family == "constant":
            return constant_profile(float(params.pop("value", 1.0)))
        if family == "power_decay":
            return power_decay_profile(float(params.pop("gamma")),
                                       float(params.pop("scale", 1.0)))
        if family == "exp_decay":
            return exp_decay_profile(float(params.pop("rate")),
                                     float(params.pop("scale", 1.0)))
    except KeyError as exc:
        raise ConfigurationError(f"profile '{family}' is missing parameter {exc}")
    raise ConfigurationError(f"unknown time profile family '{family}'")
