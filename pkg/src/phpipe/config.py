"""Run configuration: a flat sectioned key=value file, validated against a
fixed schema, with a canonical text form whose SHA-256 identifies every
artifact produced under it.

Sections: [physical] overrides of PhysicalParams fields; [integrator]
stepping of the full model; [firefly] optimizer settings; [estimation]
synthetic-data and fitting settings; [run] master seed; [output] artifact
destination.  Unknown sections or keys are rejected, as are values that
fail the underlying type validation.  Empty string means "unset" for the
optional keys.
"""

from __future__ import annotations

import configparser
import hashlib
import math
from dataclasses import dataclass, fields as _dc_fields, field, replace as _dc_replace

from .errors import ConfigError
from .estimation import PARAM_NAMES
from .firefly import NOISE_KINDS
from .model import PhysicalParams

_PHYSICAL_KEYS = tuple(f.name for f in _dc_fields(PhysicalParams))

# key -> (type tag, default); tags: float, int, str, bool, opt_float (empty
# string allowed, meaning None)
_SCHEMA = {
    "physical": {name: ("float", getattr(PhysicalParams(), name)) for name in _PHYSICAL_KEYS},
    "integrator": {
        "t_end": ("float", 0.05),
        "dt": ("float", 1e-8),
        "store_every": ("int", 0),      # 0 = choose from samples
        "samples": ("int", 1001),
        "p_v1": ("opt_float", None),    # None = gas-law pressure of the live state
        "p_v2": ("opt_float", None),    # None = liquid-line pressure p_l
    },
    "firefly": {
        "n": ("int", 20),
        "iterations": ("int", 5000),
        "beta0": ("float", 1.0),
        "gamma": ("float", 1.0),
        "alpha": ("float", 0.03),
        "alpha_decay": ("float", 0.99),
        "noise": ("str", "uniform"),
        "levy_lambda": ("opt_float", None),
    },
    "estimation": {
        "forward": ("str", "analytic"),
        "t_end": ("float", 4e-3),
        "n_points": ("int", 25),
        "noise_rel": ("opt_float", 0.02),
        "noise_sigma": ("opt_float", None),
        "free": ("str", ",".join(PARAM_NAMES)),
        "box": ("str", "constrained"),
        "bound_L": ("opt_pair", None),
        "bound_d_i": ("opt_pair", None),
        "bound_T_v": ("opt_pair", None),
        "bound_T_w": ("opt_pair", None),
        "bound_p_v": ("opt_pair", None),
        "n_runs": ("int", 40),
        "n_restarts": ("int", 40),
        "friction_coeff": ("float", 0.01),
        "ode_dt": ("float", 1e-8),
        "sigma_scope": ("str", "swarm"),
    },
    "run": {
        "seed": ("int", 0),
    },
    "output": {
        "dir": ("str", "out"),
        "plot": ("bool", True),
    },
}

_ENUM_KEYS = {
    ("firefly", "noise"): NOISE_KINDS,
    ("estimation", "forward"): ("analytic", "ode"),
    ("estimation", "box"): ("constrained", "loose"),
    ("estimation", "sigma_scope"): ("swarm", "ensemble"),
}


def format_float(x: float) -> str:
    """Serialization form used everywhere: 17 significant digits, enough to
    round-trip any double exactly."""
    return f"{float(x):.17g}"


def _parse_value(section: str, key: str, raw):
    tag = _SCHEMA[section][key][0]
    if not isinstance(raw, str):
        # already typed (programmatic override or report snapshot); coerce so
        # the canonical text is identical to the file-parsed form
        try:
            if tag == "float":
                value = float(raw)
            elif tag == "int":
                value = int(raw)
            elif tag == "bool":
                value = bool(raw)
            elif tag == "opt_float":
                value = None if raw is None else float(raw)
            elif tag == "opt_pair":
                value = None if raw is None else (float(raw[0]), float(raw[1]))
            else:
                value = str(raw)
        except (TypeError, ValueError, IndexError):
            raise ConfigError(
                f"invalid value for {section}.{key}: {raw!r} (expected {tag})") from None
    else:
        raw = raw.strip()
        try:
            if tag == "float":
                value = float(raw)
            elif tag == "int":
                value = int(raw)
            elif tag == "bool":
                low = raw.lower()
                if low in ("true", "1", "yes", "on"):
                    value = True
                elif low in ("false", "0", "no", "off"):
                    value = False
                else:
                    raise ValueError(raw)
            elif tag == "opt_float":
                value = None if raw == "" else float(raw)
            elif tag == "opt_pair":
                if raw == "":
                    value = None
                else:
                    parts = [p for p in raw.split(",") if p.strip() != ""]
                    if len(parts) != 2:
                        raise ValueError(raw)
                    value = (float(parts[0]), float(parts[1]))
            else:
                value = raw
        except ValueError:
            raise ConfigError(
                f"invalid value for {section}.{key}: {raw!r} (expected {tag})") from None
    if tag == "float" and not math.isfinite(value):
        raise ConfigError(f"{section}.{key} must be finite, got {value}")
    if tag == "opt_float" and value is not None and not math.isfinite(value):
        raise ConfigError(f"{section}.{key} must be finite, got {value}")
    enum = _ENUM_KEYS.get((section, key))
    if enum and value not in enum:
        raise ConfigError(f"{section}.{key} must be one of {enum}, got {value!r}")
    return value


@dataclass(frozen=True)
class RunConfig:
    """Fully resolved configuration; every schema key carries a value."""

    values: dict = field(default_factory=dict)

    def __post_init__(self):
        resolved = {}
        for section, keys in _SCHEMA.items():
            for key, (_tag, default) in keys.items():
                resolved[(section, key)] = default
        for (section, key), raw in dict(self.values).items():
            if section not in _SCHEMA or key not in _SCHEMA[section]:
                raise ConfigError(f"unknown configuration key {section}.{key}")
            resolved[(section, key)] = _parse_value(section, key, raw)
        object.__setattr__(self, "values", resolved)

    def get(self, section: str, key: str):
        try:
            return self.values[(section, key)]
        except KeyError:
            raise ConfigError(f"unknown configuration key {section}.{key}") from None

    def with_overrides(self, overrides) -> "RunConfig":
        """New config with (section, key) -> raw value entries applied."""
        merged = dict(self.values)
        for (section, key), raw in dict(overrides).items():
            if section not in _SCHEMA or key not in _SCHEMA[section]:
                raise ConfigError(f"unknown configuration key {section}.{key}")
            merged[(section, key)] = _parse_value(section, key, raw)
        return RunConfig(values=merged)

    def physical_params(self) -> PhysicalParams:
        kw = {name: self.get("physical", name) for name in _PHYSICAL_KEYS}
        return PhysicalParams(**kw)

    def physical_overrides(self) -> dict:
        """Physical fields that differ from the library defaults."""
        ref = PhysicalParams()
        out = {}
        for name in _PHYSICAL_KEYS:
            v = self.get("physical", name)
            if v != getattr(ref, name):
                out[name] = v
        return out

    def canonical_text(self) -> str:
        """Deterministic text form: sorted section.key=value lines.

        The [output] section (destination and rendering switches) is
        excluded: the hash identifies the computation, so results written
        to different directories under the same settings share it.
        """
        lines = []
        for (section, key) in sorted(self.values):
            if section == "output":
                continue
            lines.append(f"{section}.{key}={_canon_value(self.values[(section, key)])}")
        return "\n".join(lines) + "\n"

    def hash(self) -> str:
        return hashlib.sha256(self.canonical_text().encode("utf-8")).hexdigest()

    def snapshot(self) -> dict:
        """Nested plain-dict view (section -> key -> value) for reports."""
        out: dict = {}
        for (section, key), value in sorted(self.values.items()):
            if isinstance(value, tuple):
                value = list(value)
            out.setdefault(section, {})[key] = value
        return out


def _canon_value(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format_float(value)
    if isinstance(value, tuple):
        return ",".join(format_float(v) for v in value)
    return str(value)


def parse_set_expr(expr: str):
    """Split one ``section.key=value`` override expression."""
    head, sep, raw = expr.partition("=")
    if not sep:
        raise ConfigError(f"override must look like section.key=value, got {expr!r}")
    section, dot, key = head.strip().partition(".")
    if not dot or not section or not key:
        raise ConfigError(f"override key must be section.key, got {head.strip()!r}")
    return (section.strip(), key.strip()), raw.strip()


def load_config(path: str | None = None, overrides=None) -> RunConfig:
    """Read an INI-style config file and apply overrides on top.

    Args:
        path: file to read, or None for pure defaults.
        overrides: iterable of ``section.key=value`` strings (from --set
            flags); applied in order after the file, last write wins.

    Raises:
        ConfigError: unknown key, malformed value, or unreadable file.
    """
    raw: dict = {}
    if path is not None:
        parser = configparser.ConfigParser(interpolation=None)
        parser.optionxform = str            # keys are case-sensitive (L vs l)
        try:
            with open(path, "r", encoding="utf-8") as fh:
                parser.read_file(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config file {path}: {exc}") from exc
        except configparser.Error as exc:
            raise ConfigError(f"malformed config file {path}: {exc}") from exc
        for section in parser.sections():
            for key, value in parser.items(section):
                raw[(section, key)] = value
    cfg = RunConfig(values=raw)
    if overrides:
        ov = {}
        for expr in overrides:
            where, value = parse_set_expr(expr)
            ov[where] = value
        cfg = cfg.with_overrides(ov)
    return cfg


def snapshot_to_values(snapshot: dict) -> RunConfig:
    """Rebuild a RunConfig from a report's nested snapshot dict."""
    raw = {}
    for section, keys in snapshot.items():
        if not isinstance(keys, dict):
            raise ConfigError(f"snapshot section {section!r} is not a table")
        for key, value in keys.items():
            if isinstance(value, list):
                value = tuple(value)
            raw[(section, key)] = value
    return RunConfig(values=raw)
