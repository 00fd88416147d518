"""Experiment configuration: strict schemas, defaults, and object builders.

Configs are TOML or JSON files (chosen by extension). Every command has a
schema; unknown keys are rejected anywhere in the tree and defaults are
materialized, so the echoed config in the report is fully resolved.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .errors import ValidationError
from .grids import UNIFORM, RadialGrid, make_radial_grid
from .twobody import (
    STRONG,
    UNSCALED,
    WEAK,
    GaussianShape,
    PotentialSpec,
    SquareWell,
    TableShape,
)

COMMANDS = (
    "twobody",
    "resonance",
    "contact-spectrum",
    "critical",
    "gp-groundstate",
    "gp-evolve",
    "sweep",
    "bs-kernel",
    "cross-term",
)


@dataclass(frozen=True)
class Opt:
    kind: str  # float | int | bool | str | number_list | table | shape
    default: object = None
    required: bool = False
    choices: tuple = ()
    schema: dict | None = None


@dataclass(frozen=True, eq=False)
class ExperimentConfig:
    command: str
    parameters: dict
    seed: int
    output_dir: str

    def echo(self) -> dict:
        # output_dir is deliberately left out: it is invocation plumbing, and
        # report.json must be byte-identical across runs of the same config
        return {
            "command": self.command,
            "parameters": self.parameters,
            "seed": self.seed,
        }


# ---------------------------------------------------------------------------
# schemas

_SHAPE_SCHEMAS = {
    "square_well": {
        "kind": Opt("str", required=True, choices=("square_well", "gaussian", "user_table")),
        "radius": Opt("float", 1.0),
    },
    "gaussian": {
        "kind": Opt("str", required=True, choices=("square_well", "gaussian", "user_table")),
        "sigma": Opt("float", 1.0),
    },
    "user_table": {
        "kind": Opt("str", required=True, choices=("square_well", "gaussian", "user_table")),
        "radii": Opt("number_list", required=True),
        "samples": Opt("number_list", required=True),
    },
}


def _potential_schema(default_class: str) -> dict:
    return {
        "shape": Opt("shape", {"kind": "square_well", "radius": 1.0}),
        "coupling": Opt("float", required=True),
        "scaling_class": Opt("str", default_class, choices=(STRONG, WEAK, UNSCALED)),
        "epsilon": Opt("float", 1.0),
    }


_GRID_SCHEMA = {
    "n": Opt("int", required=True),
    "r_max": Opt("float", required=True),
    "r_min": Opt("float", 0.0),  # 0 means one spacing (uniform lattice start)
}

_COMPOSITE_SCHEMA = {
    "v1": Opt("table", required=True, schema=_potential_schema(STRONG)),
    "v2": Opt("table", required=True, schema=_potential_schema(WEAK)),
    "v3": Opt("table", required=True, schema=_potential_schema(UNSCALED)),
}

_GP_COMMON = {
    "m": Opt("int", 32),
    "side": Opt("float", 12.0),
    "g": Opt("float", required=True),
    "trap": Opt("str", "harmonic", choices=("none", "harmonic")),
    "omega": Opt("float", 1.0),
    "nonlinearity": Opt("str", "cubic", choices=("cubic", "shell")),
    "r0": Opt("float", 0.0),
    "mass": Opt("float", 1.0),
    "init_width": Opt("float", 1.4),
}

COMMAND_SCHEMAS = {
    "twobody": {
        "potential": Opt("table", required=True, schema=_potential_schema(UNSCALED)),
        "grid": Opt("table", required=True, schema=_GRID_SCHEMA),
        "k": Opt("int", 8),
        "norms": Opt("bool", True),
        "scattering": Opt("bool", False),
    },
    "resonance": {
        "potential": Opt("table", required=True, schema=_potential_schema(UNSCALED)),
        "bracket": Opt("number_list", required=True),
        "inv_tol": Opt("float", 1e-8),
        "scan_points": Opt("int", 33),
    },
    "contact-spectrum": {
        "kind": Opt("str", required=True, choices=("strong", "weak")),
        "coupling": Opt("float", required=True),
        "r_min": Opt("float", required=True),
        "r_max": Opt("float", 1.0),
        "k": Opt("int", 8),
        "fit": Opt("bool", True),
    },
    "critical": {
        "kind": Opt("str", required=True, choices=("strong", "weak")),
        "r_min_coarsest": Opt("float", required=True),
        "r_max": Opt("float", 1.0),
        "levels": Opt("int", 6),
        "probe_tol": Opt("float", 1e-3),
        "c_hi": Opt("float", 4.0),
    },
    "gp-groundstate": {
        **_GP_COMMON,
        "dt": Opt("float", 0.05),
        "max_steps": Opt("int", 20000),
        "tol": Opt("float", 1e-8),
        "save_field": Opt("bool", False),
    },
    "gp-evolve": {
        **_GP_COMMON,
        "dt": Opt("float", 1e-3),
        "steps": Opt("int", 1000),
        "sample_every": Opt("int", 10),
        "init_field": Opt("str", ""),
        "save_field": Opt("bool", False),
    },
    "sweep": {
        "composite": Opt("table", required=True, schema=_COMPOSITE_SCHEMA),
        "epsilons": Opt("number_list", required=True),
        "grid": Opt("table", required=True, schema=_GRID_SCHEMA),
        "z": Opt("float", 1.0),
    },
    "bs-kernel": {
        "potential": Opt("table", required=True, schema=_potential_schema(UNSCALED)),
        "grid": Opt("table", required=True, schema=_GRID_SCHEMA),
        "z": Opt("float", required=True),
    },
    "cross-term": {
        "composite": Opt("table", required=True, schema=_COMPOSITE_SCHEMA),
        "epsilons": Opt("number_list", required=True),
    },
}


# ---------------------------------------------------------------------------
# validation

def _coerce(value, opt: Opt, path: str):
    if opt.kind == "float":
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ValidationError(f"{path}: expected a number, got {value!r}")
        return float(value)
    if opt.kind == "int":
        if isinstance(value, bool) or not isinstance(value, int):
            raise ValidationError(f"{path}: expected an integer, got {value!r}")
        return int(value)
    if opt.kind == "bool":
        if not isinstance(value, bool):
            raise ValidationError(f"{path}: expected a boolean, got {value!r}")
        return value
    if opt.kind == "str":
        if not isinstance(value, str):
            raise ValidationError(f"{path}: expected a string, got {value!r}")
        if opt.choices and value not in opt.choices:
            raise ValidationError(
                f"{path}: {value!r} not one of {list(opt.choices)}"
            )
        return value
    if opt.kind == "number_list":
        if not isinstance(value, (list, tuple)) or any(
            isinstance(v, bool) or not isinstance(v, (int, float)) for v in value
        ):
            raise ValidationError(f"{path}: expected a list of numbers, got {value!r}")
        return [float(v) for v in value]
    if opt.kind == "table":
        return validate_table(value, opt.schema, path)
    if opt.kind == "shape":
        if not isinstance(value, dict):
            raise ValidationError(f"{path}: expected a shape table, got {value!r}")
        kind = value.get("kind")
        if kind not in _SHAPE_SCHEMAS:
            raise ValidationError(
                f"{path}.kind: {kind!r} not one of {sorted(_SHAPE_SCHEMAS)}"
            )
        return validate_table(value, _SHAPE_SCHEMAS[kind], path)
    raise ValidationError(f"{path}: unhandled option kind {opt.kind!r}")


def validate_table(table, schema: dict, path: str = "parameters") -> dict:
    if not isinstance(table, dict):
        raise ValidationError(f"{path}: expected a table, got {table!r}")
    unknown = sorted(set(table) - set(schema))
    if unknown:
        raise ValidationError(f"{path}: unknown key(s) {unknown}")
    out = {}
    for key, opt in schema.items():
        if key in table:
            raw = table[key]
        elif opt.required:
            raise ValidationError(f"{path}.{key}: required key missing")
        else:
            raw = opt.default
        out[key] = _coerce(raw, opt, f"{path}.{key}") if raw is not None else None
    return out


def load_config_file(path) -> dict:
    text_path = str(path)
    if text_path.endswith(".toml"):
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    if text_path.endswith(".json"):
        with open(path, "rb") as fh:
            return json.load(fh)
    raise ValidationError(f"config {path} must end in .toml or .json")


def resolve_config(command: str, raw: dict, seed: int, output_dir) -> ExperimentConfig:
    if command not in COMMAND_SCHEMAS:
        raise ValidationError(f"unknown command {command!r}; choose from {list(COMMANDS)}")
    params = validate_table(raw, COMMAND_SCHEMAS[command])
    if not isinstance(seed, int) or isinstance(seed, bool):
        raise ValidationError(f"seed must be an integer, got {seed!r}")
    return ExperimentConfig(
        command=command, parameters=params, seed=int(seed), output_dir=str(output_dir)
    )


# ---------------------------------------------------------------------------
# builders

def build_shape(params: dict):
    kind = params["kind"]
    if kind == "square_well":
        return SquareWell(radius=params["radius"])
    if kind == "gaussian":
        return GaussianShape(sigma=params["sigma"])
    return TableShape(radii=tuple(params["radii"]), samples=tuple(params["samples"]))


def build_potential(params: dict) -> PotentialSpec:
    return PotentialSpec(
        shape=build_shape(params["shape"]),
        coupling=params["coupling"],
        scaling_class=params["scaling_class"],
        epsilon=params["epsilon"],
    )


def build_composite_parts(params: dict) -> tuple:
    return (
        build_potential(params["v1"]),
        build_potential(params["v2"]),
        build_potential(params["v3"]),
    )


def build_grid(params: dict) -> RadialGrid:
    n = params["n"]
    r_max = params["r_max"]
    if n < 1:
        raise ValidationError(f"grid.n must be >= 1, got {n}")
    r_min = params["r_min"] if params["r_min"] > 0 else r_max / n
    return make_radial_grid(n, r_min, r_max, UNIFORM)
