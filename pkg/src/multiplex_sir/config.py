"""Flat ``key = value`` experiment configurations.

A config file holds one assignment per line; ``#`` starts a comment and blank
lines are ignored. Keys left out take the defaults below, which describe a
1000-node Erdos-Renyi multiplex with mean degree 4 in both layers,
``delta_a = delta_b = 1`` and ``gamma = kappa = 0.5``. Lists are comma
separated; grids are either a list or ``lo:hi:count`` (inclusive, evenly
spaced).
"""

import dataclasses
import math
from dataclasses import dataclass, fields

import numpy as np

from .analysis import AXIS_PARAMETERS, CELL_VALUES, ThresholdQuery, with_axis
from .engine import InitialCondition, ModelParams
from .errors import ConfigurationError
from .immunization import STRATEGIES, immunized_count
from .network import GraphSpec
from .seeding import LAYER_A, LAYER_B, derive_seed

KINDS = ("single-run", "ensemble", "threshold", "immunization-threshold", "phase-diagram",
         "cross-validate")
NO_IMMUNIZATION = "none"


@dataclass(frozen=True)
class ExperimentConfig:
    kind: str = "single-run"
    seed: int = 0
    n: int = 1000
    layer_a_topology: str = "erdos-renyi"
    layer_a_mean_degree: float = 4.0
    layer_a_path: str = ""
    layer_b_topology: str = "erdos-renyi"
    layer_b_mean_degree: float = 4.0
    layer_b_path: str = ""
    beta_a: float = 0.5
    beta_b: float = 0.5
    delta_a: float = 1.0
    delta_b: float = 1.0
    gamma: float = 0.5
    kappa: float = 0.5
    convergence_tol: float = 1e-9
    max_steps: int = 100_000
    seed_nodes: tuple = ()
    seed_count: int = 1
    seed_aware: bool = False
    strategy: str = NO_IMMUNIZATION
    v: float = 0.0
    runs: int = 100
    outbreak_criterion: float = 0.01
    bisection_tol: float = 1e-3
    strategy_draws: int = 10
    axis1: str = "beta_a"
    axis1_grid: str = "0:1:21"
    axis2: str = "beta_b"
    axis2_grid: str = "0:1:21"
    value: str = "s_b"

    # derived objects; each raises ConfigurationError naming the bad key

    def model_params(self):
        return ModelParams(**{name: getattr(self, name) for name in
                              ModelParams.RATES + ("convergence_tol", "max_steps")})

    def layer_spec(self, which):
        prefix = f"layer_{which}_"
        spec = GraphSpec(
            topology=getattr(self, prefix + "topology"),
            n=self.n,
            mean_degree=getattr(self, prefix + "mean_degree"),
            seed=derive_seed(self.seed, LAYER_A if which == "a" else LAYER_B),
            path=getattr(self, prefix + "path") or None,
        )
        try:
            spec.validate()
        except ConfigurationError as exc:
            raise ConfigurationError(str(exc).split(": ", 1)[-1], prefix + exc.field) from None
        return spec

    def grid(self, axis):
        return parse_grid(getattr(self, f"axis{axis}_grid"), f"axis{axis}_grid")

    def threshold_query(self):
        sweep = "v" if self.kind == "immunization-threshold" or self.value.startswith("v_c") \
            else "beta_b"
        return ThresholdQuery(sweep_parameter=sweep, outbreak_criterion=self.outbreak_criterion,
                              bisection_tol=self.bisection_tol,
                              strategy_draws=self.strategy_draws)

    @property
    def immunizes(self):
        return self.strategy != NO_IMMUNIZATION

    def validate(self):
        if self.kind not in KINDS:
            raise ConfigurationError(f"unknown kind {self.kind!r}; expected one of "
                                     f"{', '.join(KINDS)}", "kind")
        self.model_params()
        for which in "ab":
            self.layer_spec(which)
        if self.seed < 0:
            raise ConfigurationError("must be non-negative", "seed")
        if self.seed_nodes:
            InitialCondition(self.seed_nodes)
            if min(self.seed_nodes) < 0 or max(self.seed_nodes) >= self.n:
                raise ConfigurationError(f"seed nodes must lie in 0..{self.n - 1}",
                                         "seed_nodes")
        elif not 1 <= self.seed_count < self.n:
            raise ConfigurationError(f"must lie in 1..{self.n - 1}", "seed_count")
        if self.strategy not in (NO_IMMUNIZATION,) + STRATEGIES:
            raise ConfigurationError(f"unknown strategy {self.strategy!r}", "strategy")
        if self.kind == "immunization-threshold" and not self.immunizes:
            raise ConfigurationError("immunization-threshold needs random or targeted",
                                     "strategy")
        if self.kind in ("single-run", "ensemble", "cross-validate"):
            if self.immunizes:
                k = immunized_count(self.v, self.n)
                if not self.seed_nodes and k + self.seed_count > self.n:
                    raise ConfigurationError("not enough nodes left to seed", "seed_count")
            elif self.v != 0:
                raise ConfigurationError("set a strategy to immunize", "v")
        if self.runs < 1:
            raise ConfigurationError("must be at least 1", "runs")
        if self.strategy_draws < 1:
            raise ConfigurationError("must be at least 1", "strategy_draws")
        if self.kind in ("threshold", "immunization-threshold", "phase-diagram"):
            self.threshold_query()
        if self.kind == "phase-diagram":
            for axis in (1, 2):
                name = getattr(self, f"axis{axis}")
                if name not in AXIS_PARAMETERS:
                    raise ConfigurationError(f"unknown axis {name!r}", f"axis{axis}")
                for x in self.grid(axis):
                    self.model_params_at({name: x}, f"axis{axis}_grid")
            if self.axis1 == self.axis2:
                raise ConfigurationError("axes must differ", "axis2")
            if self.value not in CELL_VALUES:
                raise ConfigurationError(f"unknown value {self.value!r}", "value")
        return self

    def model_params_at(self, overrides, field):
        params = self.model_params()
        try:
            for name, x in overrides.items():
                params = with_axis(params, name, x)
        except ConfigurationError as exc:
            raise ConfigurationError(str(exc).split(": ", 1)[-1], field) from None
        return params

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)


_FIELDS = {f.name: f for f in fields(ExperimentConfig)}


def parse_grid(text, field="grid"):
    text = text.strip()
    try:
        if ":" in text:
            lo, hi, count = text.split(":")
            count = int(count)
            if count < 1:
                raise ValueError
            if count == 1:
                return [float(lo)]
            return [round(float(x), 12) for x in np.linspace(float(lo), float(hi), count)]
        values = [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise ConfigurationError(f"cannot read grid {text!r}", field) from None
    if not values:
        raise ConfigurationError("grid is empty", field)
    return values


def _convert(name, raw):
    kind = _FIELDS[name].type
    raw = raw.strip()
    try:
        if kind is bool:
            if raw.lower() in ("true", "yes", "1"):
                return True
            if raw.lower() in ("false", "no", "0"):
                return False
            raise ValueError
        if kind is int:
            value = float(raw)
            if value != int(value):
                raise ValueError
            return int(value)
        if kind is float:
            value = float(raw)
            if not math.isfinite(value):
                raise ValueError
            return value
        if kind is tuple:
            return tuple(int(x) for x in raw.split(",") if x.strip())
    except ValueError:
        raise ConfigurationError(f"cannot read {raw!r} as {kind.__name__}", name) from None
    return raw


def _format(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, tuple):
        return ",".join(str(x) for x in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def apply_overrides(values, assignments, source="--set"):
    """Fold ``key=value`` strings into the dict ``values`` in place."""
    for item in assignments:
        key, sep, raw = item.partition("=")
        key = key.strip()
        if not sep:
            raise ConfigurationError(f"{source} expects key=value, got {item!r}", key or None)
        if key not in _FIELDS:
            raise ConfigurationError(f"unknown key ({source})", key)
        values[key] = _convert(key, raw)
    return values


def parse_values(text):
    """Read config text into a dict of typed values (defaults not filled in)."""
    values = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, raw = line.partition("=")
        key = key.strip()
        if not sep:
            raise ConfigurationError(f"line {lineno}: expected key = value", key or None)
        if key not in _FIELDS:
            raise ConfigurationError(f"line {lineno}: unknown key", key)
        if key in values:
            raise ConfigurationError(f"line {lineno}: duplicate key", key)
        try:
            values[key] = _convert(key, raw)
        except ConfigurationError as exc:
            raise ConfigurationError(f"line {lineno}: {str(exc).split(': ', 1)[1]}",
                                     key) from None
    return values


def parse_config(text, overrides=()):
    values = parse_values(text)
    apply_overrides(values, overrides)
    return ExperimentConfig(**values).validate()


def load_config(path, overrides=()):
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read(), overrides)


def serialize_config(config):
    """Every key, one per line, in a fixed order."""
    return "".join(f"{f.name} = {_format(getattr(config, f.name))}\n"
                   for f in fields(ExperimentConfig))


def changed_keys(config):
    """Only the keys that differ from the defaults (used for the presets)."""
    default = ExperimentConfig()
    return "".join(f"{f.name} = {_format(getattr(config, f.name))}\n"
                   for f in fields(ExperimentConfig)
                   if getattr(config, f.name) != getattr(default, f.name))


# Figure designs. Unstated settings keep the defaults above; threshold curves
# sweep their parameter on an 11-point grid and pair it with a short second
# axis standing in for the curves of a panel.
PRESETS = {
    "fig3": ("epidemic threshold against beta_a, one curve per recovery rate",
             dict(kind="phase-diagram", value="beta_bc", axis1="beta_a", axis1_grid="0:1:11",
                  axis2="delta", axis2_grid="0.6,0.8,1.0")),
    "fig4": ("final outbreak size over (beta_a, beta_b)",
             dict(kind="phase-diagram", value="s_b", axis1="beta_a", axis2="beta_b")),
    "fig5": ("epidemic threshold against gamma, one curve per beta_a",
             dict(kind="phase-diagram", value="beta_bc", axis1="gamma", axis1_grid="0:1:11",
                  axis2="beta_a", axis2_grid="0.2,0.5,0.8")),
    "fig6": ("final outbreak size over (gamma, beta_b)",
             dict(kind="phase-diagram", value="s_b", axis1="gamma", axis2="beta_b")),
    "fig7": ("epidemic threshold against kappa, one curve per beta_a",
             dict(kind="phase-diagram", value="beta_bc", axis1="kappa", axis1_grid="0:1:11",
                  axis2="beta_a", axis2_grid="0.2,0.5,0.8")),
    "fig8": ("final outbreak size over (kappa, beta_b)",
             dict(kind="phase-diagram", value="s_b", axis1="kappa", axis2="beta_b")),
    "fig9a": ("random immunization threshold over (beta_a, beta_b)",
              dict(kind="phase-diagram", value="v_c_random", axis1="beta_a",
                   axis1_grid="0:1:6", axis2="beta_b", axis2_grid="0:1:6")),
    "fig9b": ("targeted immunization threshold over (beta_a, beta_b)",
              dict(kind="phase-diagram", value="v_c_targeted", axis1="beta_a",
                   axis1_grid="0:1:6", axis2="beta_b", axis2_grid="0:1:6")),
}


def preset_experiments():
    """Named configs, in a stable order."""
    return {name: ExperimentConfig(**values).validate()
            for name, (_, values) in PRESETS.items()}


def preset_text(name):
    if name not in PRESETS:
        raise ConfigurationError(f"unknown preset {name!r}; try one of {', '.join(PRESETS)}",
                                 "preset")
    description, values = PRESETS[name]
    return f"# {name}: {description}\n" + changed_keys(ExperimentConfig(**values))
