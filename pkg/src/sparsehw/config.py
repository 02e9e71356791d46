"""YAML experiment configuration: schema, defaults and validation.

Every validation failure raises :class:`ConfigError` naming the dotted key,
the offending value, the violated constraint and, when known, the line of
the config file.
"""

from __future__ import annotations

import copy
import hashlib
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import numpy as np
import yaml

from .bounds import DEFAULT_C
from .coupling import PRESETS, CouplingWeights
from .errors import ConfigError, FeasibilityError, NotPSDError, SparseHWError
from .simulation.scenarios import MATRICES, SETTINGS, BilinearScenario, EstimatorScenario, build_matrix
from .specs import FAMILIES, MeasurementErrorSpec, MissingSpec, PopulationSpec

SCENARIOS = ("complete", "missing", "bounded-error")
TAIL_SETTINGS = ("estimator",) + SETTINGS
GRID_UNITS = ("absolute", "sqrtE1")

DEFAULTS: dict[str, Any] = {
    "scenario": "complete",
    "n": 100,
    "p": 10,
    "q": 10,
    "alpha": 0.05,
    "reps": 2000,
    "seed": 0,
    "output": "sparsehw-out",
    "population": {
        "family": "gaussian",
        "mu_x": 0.0,
        "mu_y": 0.0,
        "sd_x": 1.0,
        "sd_y": 1.0,
        "corr_x": 0.0,
        "corr_y": 0.0,
        "signals": [],
        "KX": None,
        "KY": None,
    },
    "missing": {
        "pi_x": 0.8,
        "pi_y": 0.8,
        "coupling": "independent",
        "pi_xy": None,
    },
    "errors": {
        "u_x": 0.8,
        "u_y": 0.8,
        "b_x": 1.0,
        "b_y": 1.0,
        "coupling": "independent",
        "u_xy": None,
        "dispersion": 10.0,
    },
    "tail": {
        "setting": "estimator",
        "entry": [0, 0],
        "t_grid": {"units": "sqrtE1", "start": 0.25, "stop": 6.0, "num": 24},
        "rho": 0.5,
        "sd1": 1.0,
        "sd2": 1.0,
        "mu1": 1.0,
        "mu2": 1.0,
        "pi1": 0.7,
        "pi2": 0.7,
        "u1": 0.6,
        "u2": 0.6,
        "B1": 1.0,
        "B2": 1.0,
        "coupling": {"comonotone": 0.5, "independent": 0.5, "countermonotone": 0.0},
        "matrix": "random",
        "matrix_seed": 0,
    },
    "constants": {
        "c": DEFAULT_C,
        "d": None,
        "C": 1.0,
        "d_cond": 1.0,
        "calibrate": False,
        "file": None,
    },
    "mgf": {
        "rho": [0.0, 0.5],
        "a": [1.0, -1.0, 0.5, -0.5],
        "lambda_fractions": [0.1, 0.3, 0.5, 0.7, 0.9],
        "reps": 1_000_000,
        "hoeffding_terms": 50,
        "hoeffding_pi": 0.7,
        "hoeffding_reps": 10_000,
    },
}

# keys that change where or how fast results are produced, not what they are
NON_SEMANTIC_KEYS = ("output",)


def _line_map(node, prefix: str = "", out: dict | None = None) -> dict[str, int]:
    out = {} if out is None else out
    if isinstance(node, yaml.MappingNode):
        for key_node, value_node in node.value:
            key = f"{prefix}{key_node.value}"
            out[key] = key_node.start_mark.line + 1
            _line_map(value_node, key + ".", out)
    return out


def load_yaml(path) -> tuple[dict, dict[str, int]]:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError("config", str(path), f"cannot read file ({exc.strerror})") from None
    try:
        node = yaml.compose(text)
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        line = mark.line + 1 if mark is not None else None
        raise ConfigError("config", str(path), f"YAML parse error: {exc}", line) from None
    if data is None:
        return {}, {}
    if not isinstance(data, dict):
        raise ConfigError("config", type(data).__name__, "top level must be a mapping", 1)
    return data, _line_map(node)


def _relative_to(source: str | None, name: str) -> Path:
    path = Path(name)
    if source is not None and not path.is_absolute():
        return Path(source).parent / path
    return path


class _Validator:
    def __init__(self, lines: dict[str, int]):
        self.lines = lines

    def fail(self, key: str, value, constraint: str):
        raise ConfigError(key, value, constraint, self.lines.get(key))

    def merge(self, defaults: dict, given: dict, prefix: str = "") -> dict:
        out = copy.deepcopy(defaults)
        for key, value in given.items():
            dotted = f"{prefix}{key}"
            if key not in defaults:
                self.fail(dotted, value, f"unknown key; expected one of {sorted(defaults)}")
            if isinstance(defaults[key], dict) and key != "coupling" and not (
                key == "t_grid" and isinstance(value, list)
            ):
                if not isinstance(value, dict):
                    self.fail(dotted, value, "must be a mapping")
                out[key] = self.merge(defaults[key], value, dotted + ".")
            else:
                out[key] = value
        return out

    def integer(self, key: str, value, lo: int | None = None, hi: int | None = None) -> int:
        if isinstance(value, bool) or not isinstance(value, int):
            self.fail(key, value, "must be an integer")
        if lo is not None and value < lo:
            self.fail(key, value, f"must be >= {lo}")
        if hi is not None and value > hi:
            self.fail(key, value, f"must be <= {hi}")
        return int(value)

    def real(self, key: str, value, lo: float | None = None, hi: float | None = None,
             open_lo: bool = False, open_hi: bool = False) -> float:
        if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
            self.fail(key, value, "must be a finite number")
        v = float(value)
        lo_bad = lo is not None and (v <= lo if open_lo else v < lo)
        hi_bad = hi is not None and (v >= hi if open_hi else v > hi)
        if lo_bad or hi_bad:
            left = "(" if open_lo else "["
            right = ")" if open_hi else "]"
            lo_s = "-inf" if lo is None else f"{lo:g}"
            hi_s = "inf" if hi is None else f"{hi:g}"
            self.fail(key, value, f"must lie in {left}{lo_s}, {hi_s}{right}")
        return v

    def choice(self, key: str, value, options) -> str:
        if value not in options:
            self.fail(key, value, f"must be one of {list(options)}")
        return value

    def vector(self, key: str, value, length: int, lo=None, hi=None, open_lo=False) -> list[float]:
        if isinstance(value, list):
            if len(value) != length:
                self.fail(key, value, f"must be a scalar or a list of length {length}")
            return [self.real(key, v, lo, hi, open_lo) for v in value]
        return [self.real(key, value, lo, hi, open_lo)] * length

    def table(self, key: str, value, shape: tuple[int, int], lo=None, hi=None) -> list[list[float]]:
        if not isinstance(value, list) or len(value) != shape[0] or any(
            not isinstance(r, list) or len(r) != shape[1] for r in value
        ):
            self.fail(key, value, f"must be a {shape[0]}x{shape[1]} list of lists")
        return [[self.real(key, v, lo, hi) for v in r] for r in value]

    def coupling(self, key: str, value) -> str | dict:
        if isinstance(value, str):
            return self.choice(key, value, PRESETS)
        if isinstance(value, dict):
            allowed = ("comonotone", "independent", "countermonotone")
            for k in value:
                if k not in allowed:
                    self.fail(f"{key}.{k}", value[k], f"unknown weight; expected one of {list(allowed)}")
            w = {k: self.real(f"{key}.{k}", value.get(k, 0.0), 0.0, 1.0) for k in allowed}
            if not math.isclose(sum(w.values()), 1.0, abs_tol=1e-9):
                self.fail(key, value, "weights must sum to 1")
            return w
        self.fail(key, value, f"must be a preset {list(PRESETS)} or a weight mapping")


def _weights(value: str | dict) -> CouplingWeights:
    return CouplingWeights.preset(value) if isinstance(value, str) else CouplingWeights(**value)


@dataclass(frozen=True)
class ExperimentConfig:
    """A validated config; ``resolved`` holds every key with defaults applied."""

    resolved: dict
    lines: dict
    source: str | None = None

    def __getitem__(self, key: str):
        return self.resolved[key]

    @property
    def seed(self) -> int:
        return int(self.resolved["seed"])

    @property
    def reps(self) -> int:
        return int(self.resolved["reps"])

    @property
    def output(self) -> Path:
        return Path(self.resolved["output"])

    def constants_path(self) -> Path | None:
        name = self.resolved["constants"]["file"]
        return None if name is None else _relative_to(self.source, name)

    def canonical(self) -> dict:
        return {k: v for k, v in self.resolved.items() if k not in NON_SEMANTIC_KEYS}

    def content_hash(self) -> str:
        blob = json.dumps(self.canonical(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()

    def dump(self) -> str:
        return yaml.safe_dump(self.resolved, sort_keys=True, default_flow_style=None)

    def with_overrides(self, **overrides) -> "ExperimentConfig":
        data = copy.deepcopy(self.resolved)
        for k, v in overrides.items():
            if v is not None:
                data[k] = v
        return validate(data, self.lines, self.source)

    # object builders -------------------------------------------------------

    def _fail(self, key: str, value, exc: Exception):
        raise ConfigError(key, value, str(exc), self.lines.get(key)) from None

    def population(self) -> PopulationSpec:
        pop = self.resolved["population"]
        try:
            return PopulationSpec.build(
                self["p"], self["q"], pop["mu_x"], pop["mu_y"], pop["sd_x"], pop["sd_y"],
                pop["corr_x"], pop["corr_y"], signals=pop["signals"], family=pop["family"],
                KX=pop["KX"], KY=pop["KY"],
            )
        except NotPSDError as exc:
            self._fail("population", "joint covariance", exc)

    def missing_spec(self) -> MissingSpec:
        m = self.resolved["missing"]
        p, q = self["p"], self["q"]
        try:
            if m["pi_xy"] is None:
                return MissingSpec.preset(m["pi_x"], m["pi_y"], _weights(m["coupling"]), p, q)
            return MissingSpec(np.array(m["pi_x"]), np.array(m["pi_y"]), np.array(m["pi_xy"]))
        except FeasibilityError as exc:
            key = "missing.pi_xy" if m["pi_xy"] is not None else "missing.coupling"
            self._fail(key, f"cell {exc.cell}" if exc.cell else m["pi_xy"], exc)

    def error_spec(self) -> MeasurementErrorSpec:
        e = self.resolved["errors"]
        p, q = self["p"], self["q"]
        try:
            if e["u_xy"] is None:
                return MeasurementErrorSpec.preset(
                    e["u_x"], e["u_y"], e["b_x"], e["b_y"], _weights(e["coupling"]),
                    e["dispersion"], p, q,
                )
            return MeasurementErrorSpec(
                np.array(e["u_x"]), np.array(e["u_y"]), np.array(e["u_xy"]),
                np.array(e["b_x"]), np.array(e["b_y"]), dispersion=e["dispersion"],
            )
        except FeasibilityError as exc:
            key = "errors.u_xy" if e["u_xy"] is not None else "errors"
            self._fail(key, f"cell {exc.cell}" if getattr(exc, "cell", None) else e["u_xy"], exc)

    def estimator_scenario(self) -> EstimatorScenario:
        kind = self["scenario"]
        return EstimatorScenario(
            self.population(),
            self["n"],
            kind,
            missing=self.missing_spec() if kind == "missing" else None,
            errors=self.error_spec() if kind == "bounded-error" else None,
        )

    def bilinear_scenario(self) -> BilinearScenario:
        t = self.resolved["tail"]
        A = build_matrix(t["matrix"], self["n"], t["matrix_seed"])
        kwargs = {k: t[k] for k in ("rho", "sd1", "sd2", "mu1", "mu2", "pi1", "pi2",
                                    "u1", "u2", "B1", "B2")}
        try:
            return BilinearScenario(t["setting"], A, coupling=_weights(t["coupling"]),
                                    dispersion=self.resolved["errors"]["dispersion"], **kwargs)
        except SparseHWError as exc:
            self._fail("tail", t["setting"], exc)


def validate(data: dict, lines: dict | None = None, source: str | None = None) -> ExperimentConfig:
    lines = lines or {}
    v = _Validator(lines)
    r = v.merge(DEFAULTS, data)
    v.choice("scenario", r["scenario"], SCENARIOS)
    r["n"] = v.integer("n", r["n"], 2)
    r["p"] = v.integer("p", r["p"], 1)
    r["q"] = v.integer("q", r["q"], 1)
    r["alpha"] = v.real("alpha", r["alpha"], 0.0, 1.0, open_lo=True, open_hi=True)
    if r["p"] * r["q"] / r["alpha"] <= 1.0:
        v.fail("alpha", r["alpha"], "p*q/alpha must exceed 1")
    r["reps"] = v.integer("reps", r["reps"], 100)
    r["seed"] = v.integer("seed", r["seed"], 0, 2**64 - 1)
    if not isinstance(r["output"], str) or not r["output"]:
        v.fail("output", r["output"], "must be a nonempty path string")
    p, q = r["p"], r["q"]

    pop = r["population"]
    v.choice("population.family", pop["family"], FAMILIES)
    pop["mu_x"] = v.vector("population.mu_x", pop["mu_x"], p)
    pop["mu_y"] = v.vector("population.mu_y", pop["mu_y"], q)
    pop["sd_x"] = v.vector("population.sd_x", pop["sd_x"], p, 0.0, open_lo=True)
    pop["sd_y"] = v.vector("population.sd_y", pop["sd_y"], q, 0.0, open_lo=True)
    pop["corr_x"] = v.real("population.corr_x", pop["corr_x"], -1.0, 1.0)
    pop["corr_y"] = v.real("population.corr_y", pop["corr_y"], -1.0, 1.0)
    if not isinstance(pop["signals"], list):
        v.fail("population.signals", pop["signals"], "must be a list of [k, l, covariance]")
    sigs = []
    for s in pop["signals"]:
        if not isinstance(s, list) or len(s) != 3:
            v.fail("population.signals", s, "each signal must be [k, l, covariance]")
        k = v.integer("population.signals", s[0], 0, p - 1)
        l_ = v.integer("population.signals", s[1], 0, q - 1)
        sigs.append([k, l_, v.real("population.signals", s[2])])
    pop["signals"] = sigs
    for key in ("KX", "KY"):
        if pop[key] is not None:
            pop[key] = v.real(f"population.{key}", pop[key], 0.0, open_lo=True)

    m = r["missing"]
    m["pi_x"] = v.vector("missing.pi_x", m["pi_x"], p, 0.0, 1.0, open_lo=True)
    m["pi_y"] = v.vector("missing.pi_y", m["pi_y"], q, 0.0, 1.0, open_lo=True)
    m["coupling"] = v.coupling("missing.coupling", m["coupling"])
    if m["pi_xy"] is not None:
        m["pi_xy"] = v.table("missing.pi_xy", m["pi_xy"], (p, q), 0.0, 1.0)

    e = r["errors"]
    e["u_x"] = v.vector("errors.u_x", e["u_x"], p, 0.0, open_lo=True)
    e["u_y"] = v.vector("errors.u_y", e["u_y"], q, 0.0, open_lo=True)
    e["b_x"] = v.vector("errors.b_x", e["b_x"], p, 0.0, open_lo=True)
    e["b_y"] = v.vector("errors.b_y", e["b_y"], q, 0.0, open_lo=True)
    e["coupling"] = v.coupling("errors.coupling", e["coupling"])
    e["dispersion"] = v.real("errors.dispersion", e["dispersion"], 0.0, open_lo=True)
    if e["u_xy"] is not None:
        e["u_xy"] = v.table("errors.u_xy", e["u_xy"], (p, q), 0.0)

    t = r["tail"]
    v.choice("tail.setting", t["setting"], TAIL_SETTINGS)
    if not isinstance(t["entry"], list) or len(t["entry"]) != 2:
        v.fail("tail.entry", t["entry"], "must be [k, l]")
    t["entry"] = [v.integer("tail.entry", t["entry"][0], 0, p - 1),
                  v.integer("tail.entry", t["entry"][1], 0, q - 1)]
    g = t["t_grid"]
    if isinstance(g, list):
        if not g:
            v.fail("tail.t_grid", g, "must be nonempty")
        t["t_grid"] = [v.real("tail.t_grid", x, 0.0, open_lo=True) for x in g]
    else:
        v.choice("tail.t_grid.units", g["units"], GRID_UNITS)
        g["start"] = v.real("tail.t_grid.start", g["start"], 0.0, open_lo=True)
        g["stop"] = v.real("tail.t_grid.stop", g["stop"], g["start"])
        g["num"] = v.integer("tail.t_grid.num", g["num"], 1, 10_000)
    t["rho"] = v.real("tail.rho", t["rho"], -1.0, 1.0)
    for key in ("sd1", "sd2", "B1", "B2", "u1", "u2"):
        t[key] = v.real(f"tail.{key}", t[key], 0.0, open_lo=True)
    for key in ("mu1", "mu2"):
        t[key] = v.real(f"tail.{key}", t[key])
    for key in ("pi1", "pi2"):
        t[key] = v.real(f"tail.{key}", t[key], 0.0, 1.0, open_lo=True)
    t["coupling"] = v.coupling("tail.coupling", t["coupling"])
    v.choice("tail.matrix", t["matrix"], MATRICES)
    t["matrix_seed"] = v.integer("tail.matrix_seed", t["matrix_seed"], 0)

    c = r["constants"]
    c["c"] = v.real("constants.c", c["c"], 0.0, open_lo=True)
    if c["d"] is not None:
        c["d"] = v.real("constants.d", c["d"], 1.0, open_lo=True)
    c["C"] = v.real("constants.C", c["C"], 0.0, open_lo=True)
    c["d_cond"] = v.real("constants.d_cond", c["d_cond"], 0.0, open_lo=True)
    if not isinstance(c["calibrate"], bool):
        v.fail("constants.calibrate", c["calibrate"], "must be true or false")
    if c["file"] is not None:
        if not isinstance(c["file"], str) or not _relative_to(source, c["file"]).is_file():
            v.fail("constants.file", c["file"], "file does not exist")

    mg = r["mgf"]
    for key in ("rho", "a", "lambda_fractions"):
        if not isinstance(mg[key], list) or not mg[key]:
            v.fail(f"mgf.{key}", mg[key], "must be a nonempty list")
    mg["rho"] = [v.real("mgf.rho", x, -1.0, 1.0, open_lo=True, open_hi=True) for x in mg["rho"]]
    mg["a"] = [v.real("mgf.a", x) for x in mg["a"]]
    mg["lambda_fractions"] = [
        v.real("mgf.lambda_fractions", x, -1.0, 1.0, open_lo=True, open_hi=True)
        for x in mg["lambda_fractions"]
    ]
    mg["reps"] = v.integer("mgf.reps", mg["reps"], 10_000)
    mg["hoeffding_terms"] = v.integer("mgf.hoeffding_terms", mg["hoeffding_terms"], 1)
    mg["hoeffding_pi"] = v.real("mgf.hoeffding_pi", mg["hoeffding_pi"], 0.0, 1.0, open_lo=True)
    mg["hoeffding_reps"] = v.integer("mgf.hoeffding_reps", mg["hoeffding_reps"], 100)

    cfg = ExperimentConfig(r, lines, source)
    # feasibility of the moment tables is part of validation
    if r["scenario"] == "missing":
        cfg.missing_spec()
    elif r["scenario"] == "bounded-error":
        cfg.error_spec()
    cfg.population()
    return cfg


def parse_config(path) -> ExperimentConfig:
    data, lines = load_yaml(path)
    return validate(data, lines, str(path))


def load_constants(path) -> dict:
    data, lines = load_yaml(path)
    v = _Validator(lines)
    out = {}
    for key in ("c", "d", "C"):
        if key in data and data[key] is not None:
            out[key] = v.real(key, data[key], 0.0, open_lo=True)
    return out
