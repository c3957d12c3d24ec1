"""Canonical phase-space mechanics and first-integral assembly.

Conventions, fixed so the bracket homomorphism closes on the bundled systems:

    {f, g} = sum_a (df/dp_a dg/dq_a - df/dq_a dg/dp_a)
    X_H    = (dH/dp_a, -dH/dq_a)

A Lie-Hamiltonian system couples an algebra, a Hamiltonian basis realizing it
under the Poisson bracket, and a coefficient curve.  First integrals are
I(t, x) = sum_j xi_j(t) H_j(x) with xi(t) the Euler solution from xi(0) = alpha;
conservation along numerically integrated flows is the certificate.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .algebra import DimensionMismatch, LieAlgebra, bracket
from .expressions import (
    DomainError,
    Expression,
    as_expression,
    differentiate,
    evaluate,
    variables,
)
from .floquet import CoefficientCurve, FundamentalSolution, b_values, evaluate_F

__all__ = [
    "PhaseSpace",
    "phase_space",
    "HamiltonianBasis",
    "hamiltonian_basis",
    "LieHamiltonianSystem",
    "build_system",
    "poisson_bracket",
    "hamiltonian_vector_field",
    "verify_closure",
    "flow_field",
    "integrate_flow",
    "Trajectory",
    "DomainExit",
    "FirstIntegral",
    "first_integral",
    "integral_value",
    "integral_values",
    "ConservationReport",
    "conservation_report",
    "poisson_isomorphism_check",
    "sample_points",
    "default_sample_box",
]


class DomainExit(RuntimeError):
    """A trajectory left the admissible region of phase space."""

    def __init__(self, t: float, x: np.ndarray, message: str = ""):
        detail = f" ({message})" if message else ""
        super().__init__(f"trajectory left the domain at t = {t!r}, x = {np.asarray(x).tolist()}{detail}")
        self.t = t
        self.x = np.asarray(x)


@dataclass(frozen=True, eq=False)
class PhaseSpace:
    """Global canonical coordinates (q_1..q_m, p_1..p_m) with strict box bounds."""

    q_names: tuple[str, ...]
    p_names: tuple[str, ...]
    bounds: tuple[tuple[str, float | None, float | None], ...]

    @property
    def degrees(self) -> int:
        return len(self.q_names)

    @property
    def names(self) -> tuple[str, ...]:
        return self.q_names + self.p_names

    def env(self, x: np.ndarray, parameters: Mapping[str, float] | None = None) -> dict[str, float]:
        env = dict(parameters) if parameters else {}
        env.update(zip(self.names, np.asarray(x, dtype=float)))
        return env

    def violated_bound(self, x: np.ndarray) -> str | None:
        env = dict(zip(self.names, np.asarray(x, dtype=float)))
        for name, low, high in self.bounds:
            v = env[name]
            if low is not None and not v > low:
                return f"{name} = {v!r} is not > {low!r}"
            if high is not None and not v < high:
                return f"{name} = {v!r} is not < {high!r}"
        return None

    def contains(self, x: np.ndarray) -> bool:
        return self.violated_bound(x) is None


def phase_space(
    q_names: Sequence[str],
    p_names: Sequence[str] | None = None,
    bounds: Mapping[str, tuple[float | None, float | None]] | None = None,
) -> PhaseSpace:
    """Build a phase space; ``bounds`` maps coordinate names to strict (low, high)."""
    q = tuple(q_names)
    p = tuple(p_names) if p_names is not None else tuple(f"p_{name}" for name in q)
    if len(p) != len(q):
        raise ValueError(f"{len(q)} position names but {len(p)} momentum names")
    names = q + p
    if len(set(names)) != len(names):
        raise ValueError(f"coordinate names are not distinct: {names}")
    packed = []
    for name, (low, high) in sorted((bounds or {}).items()):
        if name not in names:
            raise ValueError(f"bound on unknown coordinate {name!r}")
        if low is not None and high is not None and not low < high:
            raise ValueError(f"inconsistent bounds for {name!r}: ({low!r}, {high!r})")
        packed.append((name, low, high))
    return PhaseSpace(q_names=q, p_names=p, bounds=tuple(packed))


@dataclass(frozen=True, eq=False)
class HamiltonianBasis:
    """Phase-space functions H_1..H_n with cached analytic gradients."""

    space: PhaseSpace
    exprs: tuple[Expression, ...]
    parameters: tuple[tuple[str, float], ...]
    grad_q: tuple[tuple[Expression, ...], ...]  # grad_q[i][a] = dH_i/dq_a
    grad_p: tuple[tuple[Expression, ...], ...]

    @property
    def dim(self) -> int:
        return len(self.exprs)

    def env(self, x: np.ndarray) -> dict[str, float]:
        return self.space.env(x, dict(self.parameters))

    def values(self, x: np.ndarray) -> np.ndarray:
        env = self.env(x)
        return np.array([evaluate(e, env) for e in self.exprs])

    def gradients(self, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """(dq, dp) arrays of shape (n, m) at the point x."""
        env = self.env(x)
        dq = np.array([[evaluate(g, env) for g in row] for row in self.grad_q])
        dp = np.array([[evaluate(g, env) for g in row] for row in self.grad_p])
        return dq, dp


def hamiltonian_basis(
    space: PhaseSpace,
    exprs: Sequence[Expression | str],
    parameters: Mapping[str, float] | None = None,
) -> HamiltonianBasis:
    """Parse Hamiltonians, check their free variables, cache symbolic gradients."""
    parsed = tuple(as_expression(e) for e in exprs)
    params = dict(parameters or {})
    allowed = set(space.names) | set(params)
    for e in parsed:
        unknown = variables(e) - allowed
        if unknown:
            raise ValueError(
                f"Hamiltonian uses names {sorted(unknown)} that are neither "
                f"coordinates {space.names} nor declared parameters {sorted(params)}"
            )
    grad_q = tuple(tuple(differentiate(e, name) for name in space.q_names) for e in parsed)
    grad_p = tuple(tuple(differentiate(e, name) for name in space.p_names) for e in parsed)
    return HamiltonianBasis(
        space=space,
        exprs=parsed,
        parameters=tuple(sorted(params.items())),
        grad_q=grad_q,
        grad_p=grad_p,
    )


def poisson_bracket(
    f: Expression | str,
    g: Expression | str,
    space: PhaseSpace,
    x: np.ndarray,
    parameters: Mapping[str, float] | None = None,
) -> float:
    """{f, g}(x) = sum_a (f_p g_q - f_q g_p)(x)."""
    f = as_expression(f)
    g = as_expression(g)
    env = space.env(x, parameters)
    total = 0.0
    for qa, pa in zip(space.q_names, space.p_names):
        total += evaluate(differentiate(f, pa), env) * evaluate(differentiate(g, qa), env)
        total -= evaluate(differentiate(f, qa), env) * evaluate(differentiate(g, pa), env)
    return total


def hamiltonian_vector_field(
    H: Expression | str,
    space: PhaseSpace,
    x: np.ndarray,
    parameters: Mapping[str, float] | None = None,
) -> np.ndarray:
    """(dq_a/dt, dp_a/dt) = (dH/dp_a, -dH/dq_a) at x."""
    H = as_expression(H)
    env = space.env(x, parameters)
    qdot = [evaluate(differentiate(H, pa), env) for pa in space.p_names]
    pdot = [-evaluate(differentiate(H, qa), env) for qa in space.q_names]
    return np.array(qdot + pdot)


@dataclass(frozen=True, eq=False)
class LieHamiltonianSystem:
    """Algebra + Hamiltonian basis + coefficient curve, with its closure residual."""

    algebra: LieAlgebra
    basis: HamiltonianBasis
    curve: CoefficientCurve
    closure_report: float


def default_sample_box(space: PhaseSpace) -> dict[str, tuple[float, float]]:
    """Sampling box per coordinate, nudged inside any strict bounds."""
    bounds = {name: (low, high) for name, low, high in space.bounds}
    box = {}
    for name in space.names:
        low, high = bounds.get(name, (None, None))
        lo = low + 0.5 if low is not None else -2.0
        hi = high - 0.5 if high is not None else lo + 4.0 if low is not None else 2.0
        box[name] = (lo, hi)
    return box


def sample_points(
    space: PhaseSpace,
    box: Mapping[str, tuple[float, float]],
    count: int,
    rng: np.random.Generator,
) -> np.ndarray:
    """Uniform samples inside the box, shape (count, 2m), ordered (q..., p...)."""
    cols = []
    for name in space.names:
        lo, hi = box[name]
        cols.append(rng.uniform(lo, hi, size=count))
    return np.column_stack(cols)


def _closure_residual(A: LieAlgebra, basis: HamiltonianBasis, samples: np.ndarray) -> float:
    lam = A.constants
    worst = 0.0
    for x in np.atleast_2d(samples):
        dq, dp = basis.gradients(x)
        pb = dp @ dq.T - dq @ dp.T          # pb[i, j] = {H_i, H_j}(x)
        expected = np.tensordot(lam, basis.values(x), axes=(2, 0))
        worst = max(worst, float(np.abs(pb - expected).max()))
    return worst


def build_system(
    algebra: LieAlgebra,
    basis: HamiltonianBasis,
    curve: CoefficientCurve,
    samples: np.ndarray | None = None,
    sample_box: Mapping[str, tuple[float, float]] | None = None,
    sample_count: int = 50,
    seed: int = 0,
) -> LieHamiltonianSystem:
    """Assemble a system and record the worst closure residual over samples."""
    if not (algebra.dim == basis.dim == curve.dim):
        raise DimensionMismatch(
            f"dimensions disagree: algebra {algebra.dim}, basis {basis.dim}, curve {curve.dim}"
        )
    if samples is None:
        rng = np.random.default_rng(seed)
        box = sample_box or default_sample_box(basis.space)
        samples = sample_points(basis.space, box, sample_count, rng)
    residual = _closure_residual(algebra, basis, samples)
    return LieHamiltonianSystem(algebra=algebra, basis=basis, curve=curve, closure_report=residual)


def verify_closure(sys: LieHamiltonianSystem, samples: np.ndarray) -> float:
    """max over samples and (i, j) of |{H_i, H_j}(x) - sum_k lam_ij^k H_k(x)|."""
    return _closure_residual(sys.algebra, sys.basis, samples)


# ---------------------------------------------------------------------------
# flows
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Trajectory:
    times: np.ndarray   # (N+1,)
    states: np.ndarray  # (N+1, 2m) ordered (q..., p...)


def flow_field(sys: LieHamiltonianSystem, t: float, x: np.ndarray) -> np.ndarray:
    """Right-hand side sum_i b_i(t) (dH_i/dp, -dH_i/dq) at (t, x)."""
    b = b_values(sys.curve, t)
    dq, dp = sys.basis.gradients(x)
    return np.concatenate([b @ dp, -(b @ dq)])


def integrate_flow(
    sys: LieHamiltonianSystem,
    x0: np.ndarray,
    t_end: float,
    steps: int,
) -> Trajectory:
    """RK4 on the time-dependent flow; aborts with :class:`DomainExit` if a
    step leaves the domain constraints."""
    if steps < 1:
        raise ValueError(f"steps must be >= 1, got {steps}")
    x = np.array(x0, dtype=float)
    m2 = 2 * sys.basis.space.degrees
    if x.shape != (m2,):
        raise DimensionMismatch(f"x0 has shape {x.shape}, expected ({m2},)")
    violation = sys.basis.space.violated_bound(x)
    if violation is not None:
        raise DomainExit(0.0, x, violation)

    times = np.linspace(0.0, float(t_end), steps + 1)
    states = np.empty((steps + 1, m2))
    states[0] = x
    for k in range(steps):
        t, h = times[k], times[k + 1] - times[k]
        try:
            k1 = flow_field(sys, t, x)
            k2 = flow_field(sys, t + 0.5 * h, x + 0.5 * h * k1)
            k3 = flow_field(sys, t + 0.5 * h, x + 0.5 * h * k2)
            k4 = flow_field(sys, t + h, x + h * k3)
        except DomainError as err:
            raise DomainExit(float(t), x, str(err)) from err
        x = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        violation = sys.basis.space.violated_bound(x)
        if violation is not None:
            raise DomainExit(float(times[k + 1]), x, violation)
        states[k + 1] = x
    return Trajectory(times=times, states=states)


# ---------------------------------------------------------------------------
# first integrals
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class FirstIntegral:
    """I(t, x) = sum_j xi_j(t) H_j(x) for the Euler solution xi with xi(0) = alpha."""

    basis: HamiltonianBasis
    fund: FundamentalSolution
    alpha: np.ndarray
    xi_times: np.ndarray    # the fundamental-solution grid over [0, T]
    xi_states: np.ndarray   # (N+1, n)
    period_multiple: int | None
    trivial: bool


def first_integral(
    fund: FundamentalSolution,
    basis: HamiltonianBasis,
    alpha: np.ndarray,
    period_multiple: int | None = None,
) -> FirstIntegral:
    """Solve the Euler system from xi(0) = alpha on the stored grid.

    alpha = 0 yields a valid object flagged trivial.  The grid solution is
    spot-checked against a local RK4 re-step at five nodes.
    """
    alpha = np.array(alpha, dtype=float)
    n = fund.dim
    if alpha.shape != (n,):
        raise DimensionMismatch(f"alpha has shape {alpha.shape}, expected ({n},)")
    if basis.dim != n:
        raise DimensionMismatch(f"basis has {basis.dim} Hamiltonians for dimension {n}")

    xi = np.einsum("tij,j->ti", fund.operators, alpha)
    trivial = not np.any(alpha)

    if not trivial:
        from .floquet import _rk4_step  # local RK4 re-step, same module-private integrator
        from .algebra import ad_basis

        AD = ad_basis(fund.algebra)
        rng = np.random.default_rng(0)
        for k in rng.choice(len(fund.grid) - 1, size=min(5, len(fund.grid) - 1), replace=False):
            restep = _rk4_step(AD, fund.curve, fund.grid[k], fund.grid[k + 1] - fund.grid[k], xi[k])
            scale = max(1.0, float(np.abs(xi[k]).max()))
            if float(np.abs(restep - xi[k + 1]).max()) > 1e-8 * scale:
                raise ValueError("stored xi curve does not solve the Euler system")

    alpha.setflags(write=False)
    xi.setflags(write=False)
    return FirstIntegral(
        basis=basis,
        fund=fund,
        alpha=alpha,
        xi_times=fund.grid,
        xi_states=xi,
        period_multiple=period_multiple,
        trivial=trivial,
    )


def _xi_at(I: FirstIntegral, t: float) -> np.ndarray:
    grid = I.xi_times
    T = I.fund.curve.period
    snap = 1e-9 * max(1.0, T)
    if -snap <= t <= grid[-1] + snap:
        j = int(np.searchsorted(grid, t, side="left"))
        for cand in (j - 1, j, j + 1):
            if 0 <= cand < len(grid) and abs(grid[cand] - t) <= snap:
                return I.xi_states[cand]
    return evaluate_F(I.fund, t) @ I.alpha


def integral_value(I: FirstIntegral, t: float, x: np.ndarray) -> float:
    """Evaluate I(t, x); t beyond the stored period uses F(t + T) = F(t) M."""
    return float(_xi_at(I, t) @ I.basis.values(x))


def integral_values(I: FirstIntegral, traj: Trajectory) -> np.ndarray:
    return np.array([integral_value(I, t, x) for t, x in zip(traj.times, traj.states)])


@dataclass(frozen=True)
class ConservationReport:
    max_abs_drift: float
    relative_drift: float   # drift / max(1, |I(0, x(0))|)
    samples: int


def conservation_report(I: FirstIntegral, traj: Trajectory) -> ConservationReport:
    """Drift of I along a trajectory; the operational first-integral check."""
    vals = integral_values(I, traj)
    drift = float(np.abs(vals - vals[0]).max())
    scale = max(1.0, abs(float(vals[0])))
    return ConservationReport(max_abs_drift=drift, relative_drift=drift / scale, samples=len(vals))


def poisson_isomorphism_check(
    fund: FundamentalSolution,
    basis: HamiltonianBasis,
    alpha: np.ndarray,
    beta: np.ndarray,
    samples: Sequence[tuple[float, np.ndarray]],
) -> float:
    """Worst |{I_alpha, I_beta}(t, x) - I_[alpha,beta](t, x)| over (t, x) samples.

    The bracket acts in the phase-space variables at frozen t.
    """
    A = fund.algebra
    gamma = bracket(A, alpha, beta)
    worst = 0.0
    for t, x in samples:
        F = evaluate_F(fund, t)
        xia = F @ np.asarray(alpha, dtype=float)
        xib = F @ np.asarray(beta, dtype=float)
        xig = F @ gamma
        dq, dp = basis.gradients(x)
        pb = dp @ dq.T - dq @ dp.T
        lhs = float(xia @ pb @ xib)
        rhs = float(xig @ basis.values(x))
        worst = max(worst, abs(lhs - rhs))
    return worst
