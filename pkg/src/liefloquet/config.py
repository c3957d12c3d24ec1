"""Run configuration: JSON loading, schema validation, system assembly.

A config either names a bundled preset (``milne_pinney``, ``heisenberg_center``)
or spells out the algebra, Hamiltonians, coefficients and period explicitly.
Validation against the published schema (``schema/config.json``) happens before
any computation; semantic checks that a schema cannot express (sweep ranges,
matching dimensions) follow immediately after.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path
from typing import Any, Mapping

import jsonschema
import numpy as np

from .algebra import JACOBI_TOL, LieAlgebra, load_algebra
from .dynamics import HamiltonianBasis, LieHamiltonianSystem, build_system, hamiltonian_basis, phase_space
from .expressions import parse, variables
from .floquet import CoefficientCurve, coefficient_curve
from .milne_pinney import (
    DEFAULT_OMEGA,
    MP_PERIOD,
    mp_basis,
    mp_curve,
    mp_params,
    mp_system,
)

__all__ = [
    "ConfigError",
    "NumericsConfig",
    "OutputConfig",
    "SweepAxis",
    "SweepSpec",
    "RunConfig",
    "load_config",
    "config_from_dict",
    "config_schema",
    "resolve_algebra",
    "resolve_curve",
    "resolve_basis",
    "resolve_system",
    "HEISENBERG_CENTER",
]

# bundled center demo: Heisenberg algebra realized by (p, q, 1); the third
# Hamiltonian is central, so its integral is time independent
HEISENBERG_CENTER = {
    "algebra": "heisenberg3",
    "hamiltonians": ["p", "q", "1"],
    "coefficients": ["cos(t)", "sin(t)", "0"],
    "period": MP_PERIOD,
}


class ConfigError(ValueError):
    """Configuration rejected before any computation."""


def config_schema() -> dict:
    text = resources.files("liefloquet").joinpath("schema/config.json").read_text("utf-8")
    return json.loads(text)


@dataclass(frozen=True)
class NumericsConfig:
    steps_per_period: int = 4000
    flow_steps: int | None = None
    horizon: float | None = None


@dataclass(frozen=True)
class OutputConfig:
    dir: str = "."
    prefix: str = "run"


@dataclass(frozen=True)
class SweepAxis:
    name: str
    lo: float
    hi: float
    count: int

    def grid(self) -> np.ndarray:
        return np.linspace(self.lo, self.hi, self.count)


@dataclass(frozen=True)
class SweepSpec:
    axes: tuple[SweepAxis, ...]


@dataclass(frozen=True)
class RunConfig:
    preset: str | None = None
    c: float = 1.0
    omega: str = DEFAULT_OMEGA
    algebra: Any = None          # preset name or algebra dict
    hamiltonians: tuple[str, ...] | None = None
    coefficients: tuple[str, ...] | None = None
    period: float | None = None
    parameters: tuple[tuple[str, float], ...] = ()
    domain: tuple[tuple[str, float | None, float | None], ...] = ()
    xi0: tuple[float, ...] | None = None
    alpha: tuple[float, ...] | None = None
    x0: tuple[float, ...] | None = None
    sample_box: tuple[tuple[str, tuple[float, float]], ...] = ()
    numerics: NumericsConfig = field(default_factory=NumericsConfig)
    output: OutputConfig = field(default_factory=OutputConfig)
    sweep: SweepSpec | None = None
    seed: int = 0
    jacobi_tol: float = JACOBI_TOL

    def with_parameter(self, name: str, value: float) -> "RunConfig":
        params = dict(self.parameters)
        params[name] = value
        return replace(self, parameters=tuple(sorted(params.items())))

    @property
    def parameter_dict(self) -> dict[str, float]:
        return dict(self.parameters)


def _parse_domain(raw: Mapping[str, Any]) -> tuple[tuple[str, float | None, float | None], ...]:
    out = []
    for name, spec in sorted(raw.items()):
        entries = spec if spec and isinstance(spec[0], (list, tuple)) else [spec]
        low = high = None
        for op, value in entries:
            if op == ">":
                low = float(value) if low is None else max(low, float(value))
            else:
                high = float(value) if high is None else min(high, float(value))
        out.append((name, low, high))
    return tuple(out)


def config_from_dict(data: Mapping[str, Any]) -> RunConfig:
    """Validate a raw JSON object and normalize it into a :class:`RunConfig`."""
    try:
        jsonschema.validate(instance=data, schema=config_schema())
    except jsonschema.ValidationError as err:
        where = "/".join(str(p) for p in err.absolute_path) or "<root>"
        raise ConfigError(f"config rejected at {where}: {err.message}") from err

    numerics = NumericsConfig(**data.get("numerics", {}))
    output = OutputConfig(**data.get("output", {}))

    sweep = None
    if "sweep" in data:
        axes = []
        for ax in data["sweep"]["parameters"]:
            if not ax["min"] < ax["max"]:
                raise ConfigError(
                    f"sweep axis {ax['name']!r} needs min < max, got [{ax['min']}, {ax['max']}]"
                )
            axes.append(SweepAxis(ax["name"], float(ax["min"]), float(ax["max"]), int(ax["count"])))
        sweep = SweepSpec(axes=tuple(axes))

    return RunConfig(
        preset=data.get("preset"),
        c=float(data.get("c", 1.0)),
        omega=data.get("omega", DEFAULT_OMEGA),
        algebra=data.get("algebra"),
        hamiltonians=tuple(data["hamiltonians"]) if "hamiltonians" in data else None,
        coefficients=tuple(data["coefficients"]) if "coefficients" in data else None,
        period=float(data["period"]) if "period" in data else None,
        parameters=tuple(sorted((k, float(v)) for k, v in data.get("parameters", {}).items())),
        domain=_parse_domain(data.get("domain", {})),
        xi0=tuple(data["xi0"]) if "xi0" in data else None,
        alpha=tuple(data["alpha"]) if "alpha" in data else None,
        x0=tuple(data["x0"]) if "x0" in data else None,
        sample_box=tuple(sorted((k, (float(v[0]), float(v[1]))) for k, v in data.get("sample_box", {}).items())),
        numerics=numerics,
        output=output,
        sweep=sweep,
        seed=int(data.get("seed", 0)),
        jacobi_tol=float(data.get("jacobi_tol", JACOBI_TOL)),
    )


def load_config(path: str | Path) -> RunConfig:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as err:
            raise ConfigError(f"{path}: not valid JSON: {err}") from err
    return config_from_dict(data)


# ---------------------------------------------------------------------------
# resolution into library objects
# ---------------------------------------------------------------------------

def _expanded(cfg: RunConfig) -> RunConfig:
    """Fill preset fields in, leaving explicit configs untouched."""
    if cfg.preset == "heisenberg_center":
        return replace(
            cfg,
            preset=None,
            algebra=HEISENBERG_CENTER["algebra"],
            hamiltonians=tuple(HEISENBERG_CENTER["hamiltonians"]),
            coefficients=tuple(HEISENBERG_CENTER["coefficients"]),
            period=HEISENBERG_CENTER["period"],
        )
    return cfg


def _mp(cfg: RunConfig):
    c = cfg.parameter_dict.get("c", cfg.c)
    extra = {k: v for k, v in cfg.parameter_dict.items() if k != "c"}
    return mp_params(c=c, omega=cfg.omega, parameters=extra)


def resolve_algebra(cfg: RunConfig) -> LieAlgebra:
    if cfg.preset == "milne_pinney":
        from .milne_pinney import mp_algebra

        return mp_algebra()
    cfg = _expanded(cfg)
    if cfg.algebra is None:
        raise ConfigError("config needs an 'algebra' field (or a preset) for this command")
    return load_algebra(cfg.algebra, jacobi_tol=cfg.jacobi_tol)


def resolve_curve(cfg: RunConfig) -> CoefficientCurve:
    if cfg.preset == "milne_pinney":
        return mp_curve(_mp(cfg))
    cfg = _expanded(cfg)
    if cfg.coefficients is None or cfg.period is None:
        raise ConfigError("config needs 'coefficients' and 'period' for this command")
    return coefficient_curve(cfg.coefficients, cfg.period, parameters=cfg.parameter_dict)


def resolve_basis(cfg: RunConfig) -> HamiltonianBasis:
    if cfg.preset == "milne_pinney":
        return mp_basis(_mp(cfg))
    cfg = _expanded(cfg)
    if cfg.hamiltonians is None:
        raise ConfigError("config needs a 'hamiltonians' field for this command")
    names = _coordinate_names(cfg)
    space = phase_space(names[0], names[1], bounds={n: (lo, hi) for n, lo, hi in cfg.domain})
    return hamiltonian_basis(space, cfg.hamiltonians, parameters=cfg.parameter_dict)


def _coordinate_names(cfg: RunConfig) -> tuple[tuple[str, ...], tuple[str, ...]]:
    """Infer canonical pairs from the free variables of the Hamiltonians.

    Names are paired as q* with p*: 'q'/'p', or 'q1'/'p1', ...; anything that
    is a declared parameter is excluded.
    """
    assert cfg.hamiltonians is not None
    params = set(cfg.parameter_dict)
    free: set[str] = set()
    for text in cfg.hamiltonians:
        free |= set(variables(parse(text)))
    coords = sorted(free - params)
    qs = tuple(n for n in coords if n.startswith("q"))
    ps = tuple(n for n in coords if n.startswith("p"))
    if not qs and not ps:
        # constants only; fall back to a single canonical pair
        return ("q",), ("p",)
    if len(qs) != len(ps):
        raise ConfigError(
            f"cannot pair coordinates from names {coords}; expected matching q*/p* pairs"
        )
    suffixes_q = sorted(n[1:] for n in qs)
    suffixes_p = sorted(n[1:] for n in ps)
    if suffixes_q != suffixes_p:
        raise ConfigError(
            f"q names {qs} and p names {ps} do not pair up by suffix"
        )
    return tuple("q" + s for s in suffixes_q), tuple("p" + s for s in suffixes_q)


def resolve_system(cfg: RunConfig) -> LieHamiltonianSystem:
    if cfg.preset == "milne_pinney":
        return mp_system(_mp(cfg), seed=cfg.seed)
    algebra = resolve_algebra(cfg)
    basis = resolve_basis(cfg)
    curve = resolve_curve(cfg)
    box = dict(cfg.sample_box) or None
    return build_system(algebra, basis, curve, sample_box=box, seed=cfg.seed)


def resolve_horizon(cfg: RunConfig, periods: float = 2.0) -> float:
    if cfg.numerics.horizon is not None:
        return cfg.numerics.horizon
    period = MP_PERIOD if cfg.preset == "milne_pinney" else (_expanded(cfg).period or MP_PERIOD)
    return periods * period


def resolve_flow_steps(cfg: RunConfig, horizon: float) -> int:
    if cfg.numerics.flow_steps is not None:
        return cfg.numerics.flow_steps
    period = MP_PERIOD if cfg.preset == "milne_pinney" else (_expanded(cfg).period or MP_PERIOD)
    return max(1, round(cfg.numerics.steps_per_period * horizon / period))


def default_x0(cfg: RunConfig) -> tuple[float, ...] | None:
    if cfg.x0 is not None:
        return cfg.x0
    if cfg.preset == "milne_pinney":
        return (2.0, 0.0)
    if cfg.preset == "heisenberg_center":
        return (0.5, 0.5)
    return None
