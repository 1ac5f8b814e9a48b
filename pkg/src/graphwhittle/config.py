"""Experiment configuration: strict TOML sections with documented defaults.

Unknown keys are hard errors; a config echoed to JSON reconstructs the exact
same experiment.  The defaults reproduce the reference study: a rhombus chain,
the squared autoregressive family at theta0 = 1/2, a ball window of 724
vertices, a ~10^4-vertex proxy for the spectral measure, and 15 series
coefficients.
"""

from __future__ import annotations

import dataclasses
import json
import sys
from dataclasses import dataclass

from .errors import ConfigError
from .families import FAMILY_KINDS
from .graphs import GRAPH_KINDS
from .whittle import LIKELIHOOD_KINDS

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib


@dataclass(frozen=True)
class ExperimentConfig:
    # [graph] natural size parameter of the kind: length, side, or rhombus count
    graph_kind: str = "rhombus_chain"
    graph_size: int = 200
    # [subgraphs] ball around a center (-1 picks the structural middle) sized
    # either by explicit radii/box sides or by a target volume
    subgraph_kind: str = "ball"
    center: int = -1
    radii: tuple = ()
    target_volume: int = 724
    # [family]
    family_kind: str = "ar_squared"
    theta_min: float = -0.7
    theta_max: float = 0.7
    theta0: float = 0.5
    rho: float = 0.0  # 0 = computed from the family, with 10% headroom
    # [model]
    truncation_order: int = 15
    correction_radius: int = 0  # 0 = family default
    signature_order: int = 0    # 0 = 2P + 4
    # [spectral_measure] proxy_size counts vertices of the proxy graph
    measure_method: str = "eigen"
    proxy_size: int = 10000
    moment_order: int = 40
    # [estimation]
    kinds: tuple = ("unbiased",)
    tol: float = 1e-5
    # [monte_carlo]
    replicates: int = 500
    seed: int = 20260811
    workers: int = 0  # 0 = available parallelism
    legacy_section6_normalization: bool = False
    # [output]
    out_dir: str = "out"

    def validate(self) -> "ExperimentConfig":
        if self.graph_kind not in GRAPH_KINDS:
            raise ConfigError(f"graph.kind must be one of {GRAPH_KINDS}")
        if self.graph_size <= 0:
            raise ConfigError("graph.size must be positive")
        if self.subgraph_kind not in ("ball", "box"):
            raise ConfigError("subgraphs.kind must be 'ball' or 'box'")
        if not self.radii and self.target_volume <= 0:
            raise ConfigError("subgraphs needs radii or a positive target_volume")
        if self.family_kind not in FAMILY_KINDS + ("constant",):
            raise ConfigError(f"family.kind must be one of {FAMILY_KINDS + ('constant',)}")
        if not self.theta_min < self.theta0 < self.theta_max:
            raise ConfigError("family.theta0 must lie strictly inside the interval")
        if self.truncation_order < 0:
            raise ConfigError("model.truncation_order must be >= 0")
        if self.measure_method not in ("eigen", "moments"):
            raise ConfigError("spectral_measure.method must be 'eigen' or 'moments'")
        if self.proxy_size <= 0 or self.moment_order < 1:
            raise ConfigError("spectral_measure sizes must be positive")
        bad = [k for k in self.kinds if k not in LIKELIHOOD_KINDS]
        if bad or not self.kinds:
            raise ConfigError(f"estimation.kinds must be nonempty subset of {LIKELIHOOD_KINDS}")
        if self.tol <= 0:
            raise ConfigError("estimation.tol must be positive")
        if self.replicates < 0 or self.workers < 0:
            raise ConfigError("monte_carlo.replicates and workers must be >= 0")
        if not (0 <= self.seed < 2 ** 64):
            raise ConfigError("monte_carlo.seed must fit in 64 bits")
        return self


_SECTIONS = {
    "graph": {"kind": "graph_kind", "size": "graph_size"},
    "subgraphs": {"kind": "subgraph_kind", "center": "center", "radii": "radii",
                  "target_volume": "target_volume"},
    "family": {"kind": "family_kind", "theta_min": "theta_min", "theta_max": "theta_max",
               "theta0": "theta0", "rho": "rho"},
    "model": {"truncation_order": "truncation_order",
              "correction_radius": "correction_radius",
              "signature_order": "signature_order"},
    "spectral_measure": {"method": "measure_method", "proxy_size": "proxy_size",
                         "moment_order": "moment_order"},
    "estimation": {"kinds": "kinds", "tol": "tol"},
    "monte_carlo": {"replicates": "replicates", "seed": "seed", "workers": "workers",
                    "legacy_section6_normalization": "legacy_section6_normalization"},
    "output": {"directory": "out_dir"},
}

_TUPLE_FIELDS = ("radii", "kinds")


def config_from_dict(data: dict) -> ExperimentConfig:
    """Build a config from nested sections, rejecting unknown keys."""
    values = {}
    for section, content in data.items():
        if section not in _SECTIONS:
            raise ConfigError(f"unknown config section {section!r}")
        if not isinstance(content, dict):
            raise ConfigError(f"section {section!r} must be a table of keys")
        known = _SECTIONS[section]
        for key, val in content.items():
            if key not in known:
                raise ConfigError(f"unknown key {key!r} in section {section!r}")
            attr = known[key]
            if attr in _TUPLE_FIELDS:
                if not isinstance(val, (list, tuple)):
                    raise ConfigError(f"{section}.{key} must be a list")
                val = tuple(val)
            values[attr] = val
    try:
        cfg = ExperimentConfig(**values)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc
    return cfg.validate()


def config_to_dict(cfg: ExperimentConfig) -> dict:
    out = {}
    for section, known in _SECTIONS.items():
        out[section] = {}
        for key, attr in known.items():
            val = getattr(cfg, attr)
            out[section][key] = list(val) if isinstance(val, tuple) else val
    return out


def load_config(path) -> ExperimentConfig:
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except OSError:
        raise
    except Exception as exc:
        raise ConfigError(f"cannot parse config {path}: {exc}") from exc
    return config_from_dict(data)


def config_json(cfg: ExperimentConfig) -> str:
    return json.dumps(config_to_dict(cfg), indent=2, sort_keys=True)


def config_from_json(text: str) -> ExperimentConfig:
    return config_from_dict(json.loads(text))


def replace(cfg: ExperimentConfig, **changes) -> ExperimentConfig:
    return dataclasses.replace(cfg, **changes).validate()
