"""Bundled showcase: the periodic Milne-Pinney oscillator on q > 0.

The system q' = p, p' = -omega(t)^2 q + c/q^3 decomposes over sp(1, R) as
X = -alpha(t) X_2 - beta(t) X_3 with alpha = 1 - omega^2 and beta = omega^2 + 1,
realized by the Hamiltonians

    H_1 = p q / 2
    H_2 = -p^2/4 + (q^2 - c/q^2)/4
    H_3 = -p^2/4 - (q^2 + c/q^2)/4

The Euler flow preserves the quadratic form K(xi) = xi_1^2 + xi_2^2 - xi_3^2
and, written with G = diag(1, 1, -1) and mu(t) = (0, alpha, beta), satisfies
G dxi/dt = mu x xi.  The full pipeline returns a certified (anti)periodic
first integral together with the monodromy classification.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Mapping

import numpy as np

from .algebra import DimensionMismatch, LieAlgebra, ad_matrix, center, preset_algebra
from .dynamics import (
    FirstIntegral,
    HamiltonianBasis,
    LieHamiltonianSystem,
    build_system,
    first_integral,
    hamiltonian_basis,
    phase_space,
)
from .expressions import Add, Const, Expression, Neg, Pow, as_expression, evaluate, Sub
from .floquet import (
    CoefficientCurve,
    FloquetClassification,
    NoGeneratorFound,
    b_values,
    coefficient_curve,
    floquet_classify,
    fundamental_solution,
    periodic_generators,
    select_generator,
)

__all__ = [
    "MP_PERIOD",
    "MPParams",
    "mp_params",
    "mp_algebra",
    "mp_space",
    "mp_hamiltonians",
    "mp_basis",
    "mp_curve",
    "mp_system",
    "casimir",
    "cross_product_residual",
    "mp_periodic_integral",
    "DEFAULT_OMEGA",
    "MP_SAMPLE_BOX",
]

MP_PERIOD = 2.0 * np.pi
DEFAULT_OMEGA = "1 + 0.1*cos(t)"
MP_SAMPLE_BOX = {"q": (0.5, 3.0), "p": (-2.0, 2.0)}

_H_TEXT = (
    "p*q/2",
    "-p^2/4 + (q^2 - c/q^2)/4",
    "-p^2/4 - (q^2 + c/q^2)/4",
)


@dataclass(frozen=True, eq=False)
class MPParams:
    """c > 0 and a 2pi-periodic frequency expression omega(t)."""

    c: float
    omega: Expression
    parameters: tuple[tuple[str, float], ...] = ()
    period: float = MP_PERIOD


def mp_params(
    c: float = 1.0,
    omega: Expression | str = DEFAULT_OMEGA,
    parameters: Mapping[str, float] | None = None,
) -> MPParams:
    """Validate parameters; omega may reference extra named constants."""
    if not c > 0.0:
        raise ValueError(f"c must be positive, got {c!r}")
    omega = as_expression(omega)
    params = tuple(sorted((parameters or {}).items()))
    env0 = dict(params)
    envT = dict(params)
    env0["t"] = 0.0
    envT["t"] = MP_PERIOD
    gap = abs(evaluate(omega, envT) - evaluate(omega, env0))
    if gap > 1e-9:
        raise ValueError(f"omega is not 2pi-periodic: |omega(2pi) - omega(0)| = {gap!r}")
    return MPParams(c=float(c), omega=omega, parameters=params)


@lru_cache(maxsize=1)
def mp_algebra() -> LieAlgebra:
    return preset_algebra("sp1R")


@lru_cache(maxsize=1)
def mp_space():
    return phase_space(("q",), ("p",), bounds={"q": (0.0, None)})


def mp_hamiltonians() -> tuple[str, str, str]:
    return _H_TEXT


def mp_basis(params: MPParams) -> HamiltonianBasis:
    return hamiltonian_basis(
        mp_space(), _H_TEXT, parameters={"c": params.c, **dict(params.parameters)}
    )


def mp_curve(params: MPParams) -> CoefficientCurve:
    """b(t) = (0, -alpha(t), -beta(t)) = (0, omega^2 - 1, -(omega^2 + 1))."""
    w2 = Pow(params.omega, 2.0)
    exprs = (Const(0.0), Sub(w2, Const(1.0)), Neg(Add(w2, Const(1.0))))
    return coefficient_curve(exprs, MP_PERIOD, parameters=dict(params.parameters))


def mp_system(params: MPParams, sample_count: int = 50, seed: int = 0) -> LieHamiltonianSystem:
    """Assemble the showcase system; the closure residual is recorded on it."""
    return build_system(
        mp_algebra(),
        mp_basis(params),
        mp_curve(params),
        sample_box=MP_SAMPLE_BOX,
        sample_count=sample_count,
        seed=seed,
    )


def casimir(xi: np.ndarray) -> float:
    """K(xi) = xi_1^2 + xi_2^2 - xi_3^2, conserved by the sp(1, R) Euler flow."""
    xi = np.asarray(xi, dtype=float)
    if xi.shape != (3,):
        raise DimensionMismatch(f"xi has shape {xi.shape}, expected (3,)")
    return float(xi[0] ** 2 + xi[1] ** 2 - xi[2] ** 2)


def _mu_at(params: MPParams, t: float) -> np.ndarray:
    env = dict(params.parameters)
    env["t"] = t
    w2 = evaluate(params.omega, env) ** 2
    return np.array([0.0, 1.0 - w2, w2 + 1.0])  # (0, alpha(t), beta(t))


def cross_product_residual(params: MPParams, xi: np.ndarray, t: float) -> float:
    """Discrepancy of the cross-product form of the Euler system.

    With G = diag(1, 1, -1) and mu(t) = (0, alpha, beta), the right-hand side
    r = -ad_{phi(t)} xi satisfies G r = mu x xi identically; the returned value
    is ||G r - mu x xi||_inf and vanishes up to rounding.
    """
    xi = np.asarray(xi, dtype=float)
    if xi.shape != (3,):
        raise DimensionMismatch(f"xi has shape {xi.shape}, expected (3,)")
    curve = mp_curve(params)
    phi = b_values(curve, t)
    rhs = -(ad_matrix(mp_algebra(), phi) @ xi)
    G = np.diag([1.0, 1.0, -1.0])
    mu = _mu_at(params, t)
    return float(np.abs(G @ rhs - np.cross(mu, xi)).max())


def mp_periodic_integral(
    params: MPParams,
    steps_per_period: int,
) -> tuple[FirstIntegral, FloquetClassification]:
    """Full pipeline: fundamental solution, classification, generator, integral.

    Prefers a T-periodic generator (fixed eigenvector, then delta construction,
    then center); falls back to a 2T generator.  Raises
    :class:`NoGeneratorFound` carrying the classification when nothing passes.
    """
    algebra = mp_algebra()
    fund = fundamental_solution(algebra, mp_curve(params), steps_per_period)
    cls = floquet_classify(algebra, fund.monodromy)
    gens = periodic_generators(algebra, fund, cls, center(algebra))
    chosen = select_generator(gens)
    if chosen is None:
        raise NoGeneratorFound(cls)
    integral = first_integral(
        fund, mp_basis(params), chosen.vector, period_multiple=chosen.period_multiple
    )
    return integral, cls
