"""INI-style experiment configuration.

Sections and keys are fixed; unknown sections or keys are rejected so typos
fail loudly.  `load_config` returns a fully-defaulted dict, and
`write_effective_config` persists every key (defaults included) next to the
run artifacts so a run is reproducible from its output directory alone.
"""

from __future__ import annotations

import configparser
from pathlib import Path

from .harness import AdversarySpec, ExperimentConfig

# section -> key -> (default, parser)
_SCHEMA: dict[str, dict[str, tuple]] = {
    "domain": {
        "kind": ("box", str),
        "dim": (3, int),
        "scale": (None, float),
        "weights": (None, "floats"),
        "budget": (None, float),
    },
    "adversary": {
        "kind": ("iid_random", str),
        "instance_seed": (0, int),
        "noise_sigma": (0.0, float),
        "num_segments": (None, int),
        "drift_rate": (None, float),
        "w_diag": (2.0, float),
        "coupling": (0.0, float),
    },
    "learner": {
        "kind": ("so_oga", str),
        "v": (0.5, float),
        "expert_projection": ("exact", str),
        "m1_override": (None, float),
    },
    "run": {
        "feedback": ("first_full", str),
        "horizons": ((1024,), "ints"),
        "seeds": ((0,), "ints"),
        "block_size": (None, int),
        "delta_smooth": (None, float),
        "quad_nodes": (128, int),
        "metrics": (("static",), "strs"),
        "out_dir": (None, str),
    },
}


class ConfigError(ValueError):
    pass


def _parse(value: str, kind):
    value = value.strip()
    if value == "":
        return None
    if kind == "floats":
        return tuple(float(v) for v in value.replace(",", " ").split())
    if kind == "ints":
        return tuple(int(v) for v in value.replace(",", " ").split())
    if kind == "strs":
        return tuple(v for v in value.replace(",", " ").split())
    return kind(value)


def load_config(path) -> dict:
    """Parse an INI file against the schema; unknown keys are errors and
    missing keys take their documented defaults."""
    parser = configparser.ConfigParser()
    read = parser.read(path)
    if not read:
        raise ConfigError(f"config file not found: {path}")
    cfg = {sec: {k: d for k, (d, _) in keys.items()}
           for sec, keys in _SCHEMA.items()}
    for sec in parser.sections():
        if sec not in _SCHEMA:
            raise ConfigError(f"unknown config section [{sec}]")
        for key, raw in parser.items(sec):
            if key not in _SCHEMA[sec]:
                raise ConfigError(f"unknown key {key!r} in section [{sec}]")
            cfg[sec][key] = _parse(raw, _SCHEMA[sec][key][1])
    return cfg


def write_effective_config(cfg: dict, path) -> None:
    """Persist every key, defaults included, as a readable INI file."""
    parser = configparser.ConfigParser()
    for sec, keys in cfg.items():
        parser[sec] = {}
        for k, v in keys.items():
            if v is None:
                parser[sec][k] = ""
            elif isinstance(v, tuple):
                parser[sec][k] = ", ".join(str(x) for x in v)
            else:
                parser[sec][k] = str(v)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w") as fh:
        parser.write(fh)


def experiment_config(cfg: dict, horizon: int, seed: int,
                      out_dir: str | None = None) -> ExperimentConfig:
    """Assemble one run's ExperimentConfig from the parsed file plus the
    (horizon, seed) grid point."""
    adv = cfg["adversary"]
    spec = AdversarySpec(
        kind=adv["kind"], dim=cfg["domain"]["dim"],
        instance_seed=adv["instance_seed"], noise_sigma=adv["noise_sigma"],
        num_segments=adv["num_segments"], drift_rate=adv["drift_rate"],
        w_diag=adv["w_diag"], coupling=adv["coupling"])
    run = cfg["run"]
    return ExperimentConfig(
        adversary=spec, horizon=horizon, seed=seed,
        domain_kind=cfg["domain"]["kind"], domain_scale=cfg["domain"]["scale"],
        domain_weights=cfg["domain"]["weights"],
        domain_budget=cfg["domain"]["budget"],
        learner=cfg["learner"]["kind"], v=cfg["learner"]["v"],
        expert_projection=cfg["learner"]["expert_projection"],
        learner_m1=cfg["learner"]["m1_override"],
        feedback=run["feedback"], block_size=run["block_size"],
        delta_smooth=run["delta_smooth"], quad_nodes=run["quad_nodes"],
        metrics=tuple(run["metrics"]),
        out_dir=out_dir if out_dir is not None else run["out_dir"])
