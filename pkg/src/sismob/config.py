"""Scenario configuration: strict JSON schema (version 1) for runnable
experiments.

Unknown keys are rejected rather than ignored; a typo in a rate name
should fail loudly, not silently run a different experiment. Error
messages carry the offending key path for the CLI to surface.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from sismob.dynamics import ModelState
from sismob.errors import ConfigError
from sismob.mobility import (
    GRAPH_KINDS,
    GeneratorMatrix,
    PopulationDistribution,
    RegionGraph,
    make_graph,
    metropolis_hastings_rates,
    stationary_distribution,
    uniform_out_rates,
    validate_generator,
)
from sismob.spectral import EpidemicParams

MODES = ("deterministic", "stochastic", "analyze")

_TOP_KEYS = {
    "schema", "name", "notes", "mode", "graph", "rates", "beta", "delta",
    "p0", "x0", "t_end", "dt", "sample_dt", "replicas",
    "population_per_node", "seed", "expected",
}
_GRAPH_KEYS = {"kind", "n", "edges", "rates"}
_RATES_KEYS = {"uniform_out", "metropolis_hastings"}
_UNIFORM_OUT_KEYS = {"nu"}
_MH_KEYS = {"target", "base_rate"}
_EXPECTED_KEYS = {
    "verdict", "condition_iv", "final_max_p_below", "final_p_endemic_tol",
    "x_target", "final_x_gap_below",
}


def _reject_unknown(doc: dict, allowed: set, path: str):
    for key in doc:
        if key not in allowed:
            where = f"{path}.{key}" if path else key
            raise ConfigError(where, "unknown key")


def _require(doc: dict, key: str, path: str):
    if key not in doc:
        where = f"{path}.{key}" if path else key
        raise ConfigError(where, "required key is missing")
    return doc[key]


def _scalar(value, path: str, positive=False, nonnegative=False) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(path, f"expected a number, got {type(value).__name__}")
    v = float(value)
    if positive and v <= 0.0:
        raise ConfigError(path, f"must be positive, got {v}")
    if nonnegative and v < 0.0:
        raise ConfigError(path, f"must be nonnegative, got {v}")
    return v


def _int(value, path: str, minimum=None) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(path, f"expected an integer, got {type(value).__name__}")
    if minimum is not None and value < minimum:
        raise ConfigError(path, f"must be at least {minimum}, got {value}")
    return value


def _vector(value, n: int, path: str, lo=None, hi=None) -> np.ndarray:
    """Scalar or length-n list, broadcast to a length-n array."""
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        arr = np.full(n, float(value))
    elif isinstance(value, list):
        if len(value) != n:
            raise ConfigError(path, f"expected length {n}, got {len(value)}")
        try:
            arr = np.array([float(v) for v in value])
        except (TypeError, ValueError):
            raise ConfigError(path, "entries must be numbers") from None
    else:
        raise ConfigError(path, f"expected a number or list, got {type(value).__name__}")
    if lo is not None and np.any(arr < lo):
        raise ConfigError(path, f"entries must be >= {lo}")
    if hi is not None and np.any(arr > hi):
        raise ConfigError(path, f"entries must be <= {hi}")
    return arr


@dataclass
class ScenarioConfig:
    """Parsed and validated scenario; builder methods construct the
    runtime objects lazily so analyze-only configs never touch dt."""

    name: str
    mode: str
    generator: GeneratorMatrix
    beta: np.ndarray
    delta: np.ndarray
    p0: np.ndarray | None
    x0: np.ndarray | None
    t_end: float | None
    dt: float
    sample_dt: float
    replicas: int | None
    population_per_node: int | None
    seed: int | None
    notes: list = field(default_factory=list)
    expected: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return self.generator.n

    def params(self) -> EpidemicParams:
        return EpidemicParams(beta=self.beta, delta=self.delta)

    def initial_x(self) -> PopulationDistribution:
        if self.x0 is None:
            return stationary_distribution(self.generator)
        try:
            return PopulationDistribution(x=self.x0 / self.x0.sum())
        except ValueError as exc:
            raise ConfigError("x0", str(exc)) from exc

    def initial_state(self) -> ModelState:
        if self.p0 is None:
            raise ConfigError("p0", "required for trajectory modes")
        return ModelState(p=self.p0, x=self.initial_x())


def _build_generator(doc: dict) -> GeneratorMatrix:
    graph_doc = _require(doc, "graph", "")
    if not isinstance(graph_doc, dict):
        raise ConfigError("graph", "expected an object")
    _reject_unknown(graph_doc, _GRAPH_KEYS, "graph")
    n = _int(_require(graph_doc, "n", "graph"), "graph.n", minimum=1)

    explicit_rates = "rates" in graph_doc
    if "kind" in graph_doc and "edges" in graph_doc:
        raise ConfigError("graph", "give either kind or edges, not both")

    if "kind" in graph_doc:
        kind = graph_doc["kind"]
        if kind not in GRAPH_KINDS:
            raise ConfigError("graph.kind", f"expected one of {GRAPH_KINDS}, got {kind!r}")
        try:
            graph = make_graph(kind, n)
        except Exception as exc:
            raise ConfigError("graph.n", str(exc)) from exc
    elif "edges" in graph_doc:
        try:
            edges = tuple((int(i), int(j)) for (i, j) in graph_doc["edges"])
            graph = RegionGraph(n=n, edges=edges)
        except Exception as exc:
            raise ConfigError("graph.edges", str(exc)) from exc
    else:
        raise ConfigError("graph", "needs kind or edges")

    rates_doc = doc.get("rates")
    if explicit_rates:
        if rates_doc is not None:
            raise ConfigError("rates", "graph.rates already assigns rates explicitly")
        q = np.zeros((n, n))
        try:
            for (i, j, rate) in graph_doc["rates"]:
                q[int(i) - 1, int(j) - 1] = float(rate)
        except (TypeError, ValueError, IndexError) as exc:
            raise ConfigError("graph.rates", f"expected [i, j, rate] triples: {exc}") from exc
        np.fill_diagonal(q, -q.sum(axis=1))
        try:
            return validate_generator(q)
        except Exception as exc:
            raise ConfigError("graph.rates", str(exc)) from exc

    if rates_doc is None:
        raise ConfigError("rates", "required key is missing")
    if not isinstance(rates_doc, dict):
        raise ConfigError("rates", "expected an object")
    _reject_unknown(rates_doc, _RATES_KEYS, "rates")
    if len(rates_doc) != 1:
        raise ConfigError("rates", "give exactly one rate assignment")

    if "uniform_out" in rates_doc:
        sub = rates_doc["uniform_out"]
        _reject_unknown(sub, _UNIFORM_OUT_KEYS, "rates.uniform_out")
        nu = _vector(_require(sub, "nu", "rates.uniform_out"), n, "rates.uniform_out.nu")
        try:
            return uniform_out_rates(graph, nu)
        except Exception as exc:
            raise ConfigError("rates.uniform_out", str(exc)) from exc

    sub = rates_doc["metropolis_hastings"]
    _reject_unknown(sub, _MH_KEYS, "rates.metropolis_hastings")
    target = _require(sub, "target", "rates.metropolis_hastings")
    base = _scalar(
        _require(sub, "base_rate", "rates.metropolis_hastings"),
        "rates.metropolis_hastings.base_rate",
        positive=True,
    )
    if target == "uniform":
        tvec = np.full(n, 1.0 / n)
    else:
        tvec = _vector(target, n, "rates.metropolis_hastings.target")
        tvec = tvec / tvec.sum()
    try:
        return metropolis_hastings_rates(graph, tvec, base)
    except Exception as exc:
        raise ConfigError("rates.metropolis_hastings", str(exc)) from exc


def parse_scenario(text: str) -> ScenarioConfig:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError("<document>", f"invalid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError("<document>", "top level must be an object")
    _reject_unknown(doc, _TOP_KEYS, "")

    schema = _require(doc, "schema", "")
    if schema != 1:
        raise ConfigError("schema", f"unsupported schema version {schema!r}")
    mode = _require(doc, "mode", "")
    if mode not in MODES:
        raise ConfigError("mode", f"expected one of {MODES}, got {mode!r}")

    generator = _build_generator(doc)
    n = generator.n

    beta = _vector(_require(doc, "beta", ""), n, "beta")
    if np.any(beta <= 0.0):
        raise ConfigError("beta", "entries must be strictly positive")
    delta = _vector(_require(doc, "delta", ""), n, "delta", lo=0.0)

    p0 = None
    if "p0" in doc:
        p0 = _vector(doc["p0"], n, "p0", lo=0.0, hi=1.0)
    elif mode != "analyze":
        raise ConfigError("p0", "required key is missing")

    x0 = _vector(doc["x0"], n, "x0") if "x0" in doc else None
    if x0 is not None and np.any(x0 <= 0.0):
        raise ConfigError("x0", "entries must be strictly positive")

    t_end = None
    if "t_end" in doc:
        t_end = _scalar(doc["t_end"], "t_end", positive=True)
    elif mode != "analyze":
        raise ConfigError("t_end", "required key is missing")

    dt = _scalar(doc.get("dt", 0.01), "dt", positive=True)
    sample_dt = _scalar(doc.get("sample_dt", 1.0), "sample_dt", positive=True)
    if t_end is not None and sample_dt > t_end:
        sample_dt = t_end

    replicas = pop_per_node = seed = None
    if mode == "stochastic":
        replicas = _int(_require(doc, "replicas", ""), "replicas", minimum=1)
        pop_per_node = _int(
            _require(doc, "population_per_node", ""), "population_per_node", minimum=1
        )
        seed = _int(_require(doc, "seed", ""), "seed", minimum=0)
    else:
        if "replicas" in doc:
            replicas = _int(doc["replicas"], "replicas", minimum=1)
        if "population_per_node" in doc:
            pop_per_node = _int(doc["population_per_node"], "population_per_node", minimum=1)
        if "seed" in doc:
            seed = _int(doc["seed"], "seed", minimum=0)

    notes = doc.get("notes", [])
    if not isinstance(notes, list) or not all(isinstance(s, str) for s in notes):
        raise ConfigError("notes", "expected a list of strings")
    expected = doc.get("expected", {})
    if not isinstance(expected, dict):
        raise ConfigError("expected", "expected an object")
    _reject_unknown(expected, _EXPECTED_KEYS, "expected")

    name = doc.get("name", "scenario")
    if not isinstance(name, str) or not name:
        raise ConfigError("name", "expected a nonempty string")

    cfg = ScenarioConfig(
        name=name,
        mode=mode,
        generator=generator,
        beta=beta,
        delta=delta,
        p0=p0,
        x0=x0,
        t_end=t_end,
        dt=dt,
        sample_dt=sample_dt,
        replicas=replicas,
        population_per_node=pop_per_node,
        seed=seed,
        notes=list(notes),
        expected=dict(expected),
    )
    return cfg


def load_scenario(path) -> ScenarioConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError("<file>", f"cannot read {path}: {exc}") from exc
    return parse_scenario(text)
