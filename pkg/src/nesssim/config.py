"""Plain-text run configuration.

Grammar: one ``section.key = value`` per line, ``#`` comments, blank lines
ignored.  Sections and keys are fixed (unknown keys are errors, with the
offending line reported); values are parsed by the declared type of the key.
Environment variables ``NESS_<SECTION>_<KEY>`` override file values.

The fully-resolved configuration is a flat {dotted key: string} mapping that
round-trips through the parser, is embedded in every summary.json, and feeds
the model/bath digest stored in checkpoints.
"""

import hashlib
import os
from dataclasses import dataclass, field

import numpy as np

from .baths import BathSpec
from .models import ModelSpec, staggered_fields


class ConfigError(ValueError):
    pass


def _parse_bool(s):
    low = s.strip().lower()
    if low in ("true", "yes", "on", "1"):
        return True
    if low in ("false", "no", "off", "0"):
        return False
    raise ValueError(f"not a boolean: {s!r}")


# key -> (type tag, default or REQUIRED or callable(cfg) for derived defaults)
_REQUIRED = object()
_SCHEMA = {
    "model.kind": ("choice:xxz,tilted_ising", _REQUIRED),
    "model.n": ("int", _REQUIRED),
    "model.delta": ("float", 0.0),
    "model.field_pattern": ("str", "none"),
    "model.hx": ("float", 3.375),
    "model.hz": ("float", 2.0),
    "bath.kind": ("choice:single_spin,two_spin", _REQUIRED),
    "bath.gamma": ("float", None),           # default depends on bath kind
    "bath.mu_left": ("float", 0.0),
    "bath.mu_right": ("float", 0.0),
    "bath.T_left": ("float", 0.0),
    "bath.T_right": ("float", 0.0),
    "evolve.tau": ("float", 0.05),
    "evolve.order": ("int", 2),
    "evolve.t_max": ("float", 0.0),           # 0 -> 20 * n
    "evolve.dmax_init": ("int", 20),
    "evolve.dmax_cap": ("int", 80),
    "evolve.dmax_increment": ("int", 20),
    "evolve.growth_threshold": ("float", 3e-7),
    "evolve.trunc_eps": ("float", 1e-10),
    "evolve.parallel_bonds": ("bool", False),
    "convergence.tol_uniformity": ("float", 0.02),
    "convergence.tol_drift": ("float", 0.005),
    "convergence.window": ("float", 10.0),
    "convergence.current_floor": ("float", 1e-9),
    "observe.skip_left": ("int", -1),          # -1 -> model-dependent default
    "observe.skip_right": ("int", -1),
    "observe.energy_bond_endpoints": ("str", "auto"),
    "output.dir": ("str", ""),
    "output.checkpoint_every": ("float", 0.0),
}


def _convert(key, text, where):
    tag = _SCHEMA[key][0]
    try:
        if tag == "int":
            return int(text)
        if tag == "float":
            return float(text)
        if tag == "bool":
            return _parse_bool(text)
        if tag.startswith("choice:"):
            choices = tag.split(":", 1)[1].split(",")
            if text not in choices:
                raise ValueError(f"must be one of {choices}")
            return text
        return text
    except ValueError as exc:
        raise ConfigError(f"{where}: bad value for {key}: {exc}") from None


def parse_config_text(text, source="<config>"):
    """Flat {key: typed value} from config text.  Unknown keys are errors."""
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {raw!r}")
        key, _, val = line.partition("=")
        key, val = key.strip(), val.strip()
        if key not in _SCHEMA:
            raise ConfigError(f"{source}:{lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r}")
        values[key] = _convert(key, val, f"{source}:{lineno}")
    return values


def apply_env_overrides(values, environ=None):
    env = os.environ if environ is None else environ
    for key in _SCHEMA:
        var = "NESS_" + key.replace(".", "_").upper()
        if var in env:
            values[key] = _convert(key, env[var], f"${var}")
    return values


@dataclass
class RunConfig:
    values: dict = field(default_factory=dict)

    def __getitem__(self, key):
        return self.values[key]

    def flat(self):
        """Fully-resolved flat mapping with canonical string values."""
        out = {}
        for key in sorted(self.values):
            v = self.values[key]
            out[key] = repr(v) if isinstance(v, float) else str(v)
        return out

    def to_text(self):
        return "\n".join(f"{k} = {v}" for k, v in self.flat().items()) + "\n"

    def digest(self):
        """sha256 over the model/bath sections (checkpoint compatibility)."""
        lines = [f"{k} = {v}" for k, v in self.flat().items()
                 if k.startswith(("model.", "bath."))]
        return hashlib.sha256("\n".join(lines).encode()).digest()


def resolve_config(values, source="<config>"):
    """Fill defaults, validate cross-field constraints, return RunConfig."""
    out = {}
    for key, (_, default) in _SCHEMA.items():
        if key in values:
            out[key] = values[key]
        elif default is _REQUIRED:
            raise ConfigError(f"{source}: missing required key {key!r}")
        else:
            out[key] = default
    if out["bath.gamma"] is None:
        out["bath.gamma"] = 1.0 if out["bath.kind"] == "single_spin" else 2.0

    n = out["model.n"]
    if n < 2:
        raise ConfigError(f"{source}: model.n must be >= 2")
    if out["model.kind"] == "xxz" and "model.delta" not in values:
        raise ConfigError(f"{source}: model.delta is required for the xxz model")
    _resolve_fields(out, n, source)   # validates the pattern
    if out["bath.kind"] == "two_spin":
        if out["model.n"] < 4:
            raise ConfigError(f"{source}: two-spin baths need model.n >= 4")
        for side in ("left", "right"):
            if not out[f"bath.T_{side}"] > 0:
                raise ConfigError(f"{source}: two-spin baths need bath.T_{side} > 0")
    else:
        for side in ("left", "right"):
            if f"bath.mu_{side}" not in values:
                raise ConfigError(
                    f"{source}: single-spin baths need bath.mu_{side}")
    if out["evolve.order"] not in (2, 4):
        raise ConfigError(f"{source}: evolve.order must be 2 or 4")
    if not out["evolve.tau"] > 0:
        raise ConfigError(f"{source}: evolve.tau must be positive")
    if out["observe.skip_left"] < 0:
        out["observe.skip_left"] = _default_skip(out)
    if out["observe.skip_right"] < 0:
        out["observe.skip_right"] = _default_skip(out)
    if out["observe.skip_left"] + out["observe.skip_right"] >= n - 1:
        raise ConfigError(f"{source}: skip counts leave no interior for n={n}")
    ends = out["observe.energy_bond_endpoints"]
    if ends != "auto":
        try:
            lo, hi = (int(x) for x in ends.split(","))
        except ValueError:
            raise ConfigError(f"{source}: energy_bond_endpoints must be 'auto' "
                              f"or 'left,right' 1-based bond indices") from None
        if not 1 <= lo < hi <= n - 1:
            raise ConfigError(f"{source}: energy_bond_endpoints out of range")
    return RunConfig(values=out)


def _default_skip(values):
    if values["model.kind"] == "tilted_ising":
        return 4
    return 2 if values["model.field_pattern"] == "none" else 5


def _resolve_fields(values, n, source="<config>"):
    pat = values["model.field_pattern"]
    if pat == "none":
        return None
    kind, _, arg = pat.partition(":")
    try:
        if kind == "uniform":
            return np.full(n, float(arg))
        if kind == "staggered":
            return staggered_fields(n, float(arg))
        if kind == "list":
            vec = np.array([float(x) for x in arg.split(",")])
            if vec.shape != (n,):
                raise ConfigError(
                    f"{source}: field list length {len(vec)} != n={n}")
            return vec
    except ConfigError:
        raise
    except ValueError:
        raise ConfigError(f"{source}: bad field pattern {pat!r}") from None
    raise ConfigError(f"{source}: unknown field pattern kind {kind!r}")


def load_config(path, environ=None):
    with open(path) as fh:
        text = fh.read()
    values = parse_config_text(text, source=str(path))
    apply_env_overrides(values, environ)
    return resolve_config(values, source=str(path))


def config_from_text(text, source="<config>", environ=None):
    values = parse_config_text(text, source=source)
    if environ is not None:
        apply_env_overrides(values, environ)
    return resolve_config(values, source=source)


def make_model_spec(cfg):
    v = cfg.values
    return ModelSpec(kind=v["model.kind"], n=v["model.n"], delta=v["model.delta"],
                     fields=_resolve_fields(v, v["model.n"]),
                     hx=v["model.hx"], hz=v["model.hz"])


def make_bath_spec(cfg):
    v = cfg.values
    return BathSpec(kind=v["bath.kind"], gamma=v["bath.gamma"],
                    mu_left=v["bath.mu_left"], mu_right=v["bath.mu_right"],
                    T_left=v["bath.T_left"], T_right=v["bath.T_right"])


def energy_bond_endpoints(cfg):
    """0-based (left, right) bond indices for the energy-drop convention."""
    v = cfg.values
    n = v["model.n"]
    if v["observe.energy_bond_endpoints"] == "auto":
        return v["observe.skip_left"], (n - 1) - v["observe.skip_right"] - 1
    lo, hi = (int(x) for x in v["observe.energy_bond_endpoints"].split(","))
    return lo - 1, hi - 1
