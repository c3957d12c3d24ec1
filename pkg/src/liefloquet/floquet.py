"""Euler systems on Lie algebras and Floquet analysis of their monodromy.

The coefficient curve phi(t) = sum_i b_i(t) e_i drives the linear system
dxi/dt = -[phi(t), xi].  Its fundamental solution F(t), F(0) = I, is computed
with fixed-step classical RK4; the monodromy M = F(T) is classified over the
complex numbers, with eigenvectors graded by the Killing pairing <a, conj(a)>.
Admissible eigenpairs on the unit circle yield real vectors whose orbits
under F(t) close up after one or two periods.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .algebra import DimensionMismatch, LieAlgebra, ad_basis, bracket, killing_gram
from .expressions import Expression, as_expression, evaluate

__all__ = [
    "CoefficientCurve",
    "coefficient_curve",
    "b_values",
    "phi_at",
    "integrate_euler",
    "FundamentalSolution",
    "fundamental_solution",
    "evaluate_F",
    "NonInvertibleFundamental",
    "EigenConvergenceFailure",
    "NoGeneratorFound",
    "EigenPair",
    "FloquetClassification",
    "floquet_classify",
    "delta_vector",
    "PeriodicGenerator",
    "periodic_generators",
    "select_generator",
    "TAG_FIXED",
    "TAG_ANTIPERIODIC",
    "TAG_ELLIPTIC",
    "TAG_NULL",
    "TAG_OFF_CIRCLE",
]

TAG_FIXED = "fixed"
TAG_ANTIPERIODIC = "antiperiodic"
TAG_ELLIPTIC = "elliptic"
TAG_NULL = "null"
TAG_OFF_CIRCLE = "off-circle"

# classification is looser than residual checks so it survives O(h^4) error
CIRCLE_TOL = 1e-6
NULL_TOL = 1e-8
RESIDUAL_TOL = 1e-8
DET_FLOOR = 1e-8
DEDUP_SINE = 1e-6


class NonInvertibleFundamental(RuntimeError):
    """det F(t) fell below the floor; the integration blew up."""

    def __init__(self, t: float, det: float):
        super().__init__(f"|det F({t!r})| = {det!r} fell below {DET_FLOOR}")
        self.t = t
        self.det = det


class EigenConvergenceFailure(RuntimeError):
    """The QR eigenvalue iteration did not converge on the monodromy matrix."""


class NoGeneratorFound(RuntimeError):
    """The monodromy admits no certified periodic generator."""

    def __init__(self, classification: "FloquetClassification"):
        tags = ", ".join(p.tag for p in classification.eigenpairs)
        super().__init__(f"no periodic generator found; eigenpair tags: {tags}")
        self.classification = classification


@dataclass(frozen=True, eq=False)
class CoefficientCurve:
    """n scalar expressions b_i(t) with a declared period T."""

    exprs: tuple[Expression, ...]
    period: float
    periodic_flag: bool
    parameters: tuple[tuple[str, float], ...]

    @property
    def dim(self) -> int:
        return len(self.exprs)

    def env(self, t: float) -> dict[str, float]:
        env = dict(self.parameters)
        env["t"] = t
        return env


def coefficient_curve(
    exprs: Sequence[Expression | str],
    period: float,
    parameters: dict[str, float] | None = None,
    periodic: bool = True,
) -> CoefficientCurve:
    """Parse and sanity-check a coefficient curve.

    If ``periodic`` is asserted, b(T) must match b(0) within 1e-9 componentwise;
    full periodicity remains the caller's responsibility.
    """
    if period <= 0.0:
        raise ValueError(f"period must be positive, got {period!r}")
    parsed = tuple(as_expression(e) for e in exprs)
    params = tuple(sorted((parameters or {}).items()))
    curve = CoefficientCurve(parsed, float(period), bool(periodic), params)
    if periodic:
        b0 = b_values(curve, 0.0)
        bT = b_values(curve, curve.period)
        gap = float(np.abs(bT - b0).max()) if len(parsed) else 0.0
        if gap > 1e-9:
            raise ValueError(
                f"curve asserted periodic but max |b(T) - b(0)| = {gap!r} > 1e-9"
            )
    return curve


def b_values(curve: CoefficientCurve, t: float) -> np.ndarray:
    """Coefficient vector b(t)."""
    env = curve.env(t)
    return np.array([evaluate(e, env) for e in curve.exprs])


def phi_at(A: LieAlgebra, curve: CoefficientCurve, t: float) -> np.ndarray:
    """Coordinates of phi(t) = sum_i b_i(t) e_i."""
    if curve.dim != A.dim:
        raise DimensionMismatch(f"curve has {curve.dim} coefficients for dimension {A.dim}")
    return b_values(curve, t)


def _system_matrix(AD: np.ndarray, curve: CoefficientCurve, t: float) -> np.ndarray:
    # right-hand side operator of dxi/dt = -ad_{phi(t)} xi
    return -np.tensordot(b_values(curve, t), AD, axes=(0, 0))


def _rk4_step(AD, curve, t, h, state):
    a1 = _system_matrix(AD, curve, t)
    am = _system_matrix(AD, curve, t + 0.5 * h)
    a2 = _system_matrix(AD, curve, t + h)
    k1 = a1 @ state
    k2 = am @ (state + 0.5 * h * k1)
    k3 = am @ (state + 0.5 * h * k2)
    k4 = a2 @ (state + h * k3)
    return state + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def integrate_euler(
    A: LieAlgebra,
    curve: CoefficientCurve,
    xi0: np.ndarray,
    t_end: float,
    steps: int,
) -> tuple[np.ndarray, np.ndarray]:
    """RK4 solution of dxi/dt = -[phi(t), xi] on a uniform grid over [0, t_end].

    Returns ``(times, states)`` with shapes (steps+1,) and (steps+1, n),
    including both endpoints.
    """
    if steps < 1:
        raise ValueError(f"steps must be >= 1, got {steps}")
    if t_end <= 0.0:
        raise ValueError(f"t_end must be positive, got {t_end!r}")
    if curve.dim != A.dim:
        raise DimensionMismatch(f"curve has {curve.dim} coefficients for dimension {A.dim}")
    xi = np.array(xi0, dtype=float)
    if xi.shape != (A.dim,):
        raise DimensionMismatch(f"xi0 has shape {xi.shape}, expected ({A.dim},)")

    AD = ad_basis(A)
    times = np.linspace(0.0, float(t_end), steps + 1)
    states = np.empty((steps + 1, A.dim))
    states[0] = xi
    for k in range(steps):
        xi = _rk4_step(AD, curve, times[k], times[k + 1] - times[k], xi)
        states[k + 1] = xi
    return times, states


@dataclass(frozen=True, eq=False)
class FundamentalSolution:
    """Time-gridded operators F(t_k) with F(0) = I and monodromy M = F(T)."""

    grid: np.ndarray        # (N+1,) strictly increasing, grid[0] = 0, grid[-1] = T
    operators: np.ndarray   # (N+1, n, n), operators[k] = F(grid[k])
    monodromy: np.ndarray   # (n, n) = operators[-1]
    algebra: LieAlgebra
    curve: CoefficientCurve

    @property
    def dim(self) -> int:
        return self.algebra.dim


def fundamental_solution(
    A: LieAlgebra,
    curve: CoefficientCurve,
    steps_per_period: int,
) -> FundamentalSolution:
    """Integrate dF/dt = -ad_{phi(t)} F over one period, storing every node.

    Raises :class:`NonInvertibleFundamental` if any det F(t_k) falls below
    1e-8 in magnitude, which signals integration blow-up.
    """
    if not curve.periodic_flag:
        raise ValueError("fundamental_solution needs a curve asserted periodic")
    if steps_per_period < 16:
        raise ValueError(f"steps_per_period must be >= 16, got {steps_per_period}")
    if curve.dim != A.dim:
        raise DimensionMismatch(f"curve has {curve.dim} coefficients for dimension {A.dim}")

    AD = ad_basis(A)
    n = A.dim
    grid = np.linspace(0.0, curve.period, steps_per_period + 1)
    ops = np.empty((steps_per_period + 1, n, n))
    ops[0] = np.eye(n)
    F = np.eye(n)
    for k in range(steps_per_period):
        F = _rk4_step(AD, curve, grid[k], grid[k + 1] - grid[k], F)
        ops[k + 1] = F

    dets = np.abs(np.linalg.det(ops))
    worst = int(np.argmin(dets))
    if dets[worst] < DET_FLOOR:
        raise NonInvertibleFundamental(float(grid[worst]), float(dets[worst]))

    grid.setflags(write=False)
    ops.setflags(write=False)
    return FundamentalSolution(grid=grid, operators=ops, monodromy=ops[-1], algebra=A, curve=curve)


def evaluate_F(fund: FundamentalSolution, t: float) -> np.ndarray:
    """F(t) for any t >= 0 via F(kT + s) = F(s) M^k.

    Off-grid s is reached by one RK4 step from the nearest stored node at or
    below s; no interpolation, so the automorphism property is preserved to
    integration accuracy.
    """
    if t < 0.0:
        raise ValueError(f"t must be nonnegative, got {t!r}")
    T = fund.curve.period
    k = int(math.floor(t / T))
    s = t - k * T
    if s >= T:  # floating-point spill at period boundaries
        k += 1
        s -= T
    s = max(s, 0.0)

    grid = fund.grid
    j = int(np.searchsorted(grid, s, side="right")) - 1
    j = min(max(j, 0), len(grid) - 1)
    ds = s - grid[j]
    if ds > 1e-12 * max(T, 1.0):
        AD = ad_basis(fund.algebra)
        F_s = _rk4_step(AD, fund.curve, grid[j], ds, fund.operators[j])
    else:
        F_s = fund.operators[j]
    if k == 0:
        return F_s.copy()
    return F_s @ np.linalg.matrix_power(fund.monodromy, k)


# ---------------------------------------------------------------------------
# monodromy classification
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class EigenPair:
    value: complex
    vector: np.ndarray      # complex, unit Euclidean norm
    admissibility: float    # <v, conj v> in the Killing pairing (real)
    tag: str


@dataclass(frozen=True, eq=False)
class FloquetClassification:
    eigenpairs: tuple[EigenPair, ...]

    def with_tag(self, tag: str) -> tuple[EigenPair, ...]:
        return tuple(p for p in self.eigenpairs if p.tag == tag)

    @property
    def tags(self) -> tuple[str, ...]:
        return tuple(p.tag for p in self.eigenpairs)


def floquet_classify(
    A: LieAlgebra,
    M: np.ndarray,
    circle_tol: float = CIRCLE_TOL,
    null_tol: float = NULL_TOL,
) -> FloquetClassification:
    """Eigen-decompose a monodromy operator and tag each pair.

    Tags, in precedence order: ``fixed`` (|lam - 1| <= tol), ``antiperiodic``
    (|lam + 1| <= tol), ``elliptic`` (on the unit circle and admissible),
    ``null`` (<v, conj v> vanishes in the Killing pairing), ``off-circle``.
    """
    M = np.asarray(M, dtype=float)
    if M.shape != (A.dim, A.dim):
        raise DimensionMismatch(f"operator has shape {M.shape}, expected {(A.dim, A.dim)}")
    G = killing_gram(A)
    try:
        w, V = np.linalg.eig(M)
    except np.linalg.LinAlgError as err:
        raise EigenConvergenceFailure(str(err)) from err

    order = np.lexsort((-w.imag, -w.real))
    pairs = []
    for idx in order:
        lam = complex(w[idx])
        v = V[:, idx]
        adm = float(np.real(np.conj(v) @ G @ v))
        norm2 = float(np.real(np.vdot(v, v)))
        if abs(lam - 1.0) <= circle_tol:
            tag = TAG_FIXED
        elif abs(lam + 1.0) <= circle_tol:
            tag = TAG_ANTIPERIODIC
        elif abs(abs(lam) - 1.0) <= circle_tol and abs(adm) > null_tol * norm2:
            tag = TAG_ELLIPTIC
        elif abs(adm) <= null_tol * norm2:
            tag = TAG_NULL
        else:
            tag = TAG_OFF_CIRCLE
        vec = v.copy()
        vec.setflags(write=False)
        pairs.append(EigenPair(value=lam, vector=vec, admissibility=adm, tag=tag))
    return FloquetClassification(eigenpairs=tuple(pairs))


# ---------------------------------------------------------------------------
# periodic generators
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class PeriodicGenerator:
    """Real algebra vector whose Euler orbit closes after 1 or 2 periods."""

    vector: np.ndarray      # real, infinity-norm 1, first nonzero component > 0
    period_multiple: int    # 1 or 2
    provenance: str         # center | fixed-eigenvector | antiperiodic-eigenvector | delta-construction


def delta_vector(A: LieAlgebra, alpha: np.ndarray) -> np.ndarray:
    """Real vector (1/2i) [alpha, conj(alpha)] of an elliptic eigenvector.

    The bracket of a vector with its conjugate is purely imaginary, so this is
    computed as half the imaginary part; the result is fixed by the monodromy.
    """
    br = bracket(A, np.asarray(alpha, dtype=complex), np.conj(alpha))
    return np.asarray(br.imag / 2.0, dtype=float)


def _normalize_generator(v: np.ndarray) -> np.ndarray | None:
    norm = float(np.abs(v).max())
    if norm <= 1e-10:
        return None
    v = v / norm
    for comp in v:
        if abs(comp) > 1e-12:
            return -v if comp < 0 else v
    return None


def _sine_of_angle(u: np.ndarray, v: np.ndarray) -> float:
    uhat = u / np.linalg.norm(u)
    vhat = v / np.linalg.norm(v)
    return float(np.linalg.norm(uhat - (uhat @ vhat) * vhat))


def periodic_generators(
    A: LieAlgebra,
    fund: FundamentalSolution,
    cls: FloquetClassification,
    center_basis: np.ndarray,
) -> list[PeriodicGenerator]:
    """Assemble certified real generators of T- and 2T-periodic Euler orbits.

    Sources, in emission order: center vectors; real parts (and, for complex
    eigenvectors of degenerate real multipliers, imaginary parts) of fixed and
    antiperiodic eigenvectors; the delta construction for each elliptic
    admissible conjugate pair.  Candidates failing their residual check
    (||Mv -+ v|| <= 1e-8 for a normalized v) are dropped, and near-parallel
    vectors (sine of angle <= 1e-6) are deduplicated.  Null and off-circle
    eigenpairs contribute nothing; they stay visible in the classification.
    """
    M = fund.monodromy
    kept: list[PeriodicGenerator] = []

    def offer(raw: np.ndarray, period_multiple: int, provenance: str) -> None:
        v = _normalize_generator(np.asarray(raw, dtype=float))
        if v is None:
            return
        sign = -1.0 if period_multiple == 2 else 1.0
        if float(np.abs(M @ v - sign * v).max()) > RESIDUAL_TOL:
            return
        for g in kept:
            if _sine_of_angle(v, g.vector) <= DEDUP_SINE:
                return
        v = v.copy()
        v.setflags(write=False)
        kept.append(PeriodicGenerator(vector=v, period_multiple=period_multiple, provenance=provenance))

    for z in center_basis:
        offer(z, 1, "center")

    fixed = sorted(cls.with_tag(TAG_FIXED), key=lambda p: abs(p.value - 1.0))
    for p in fixed:
        offer(p.vector.real, 1, "fixed-eigenvector")
        if float(np.abs(p.vector.imag).max()) > 1e-10:
            offer(p.vector.imag, 1, "fixed-eigenvector")

    anti = sorted(cls.with_tag(TAG_ANTIPERIODIC), key=lambda p: abs(p.value + 1.0))
    for p in anti:
        offer(p.vector.real, 2, "antiperiodic-eigenvector")
        if float(np.abs(p.vector.imag).max()) > 1e-10:
            offer(p.vector.imag, 2, "antiperiodic-eigenvector")

    for p in cls.with_tag(TAG_ELLIPTIC):
        if p.value.imag <= 0.0:
            continue  # one representative per conjugate pair
        offer(delta_vector(A, p.vector), 1, "delta-construction")

    return kept


_PROVENANCE_PREFERENCE = ("fixed-eigenvector", "delta-construction", "center")


def select_generator(generators: Sequence[PeriodicGenerator]) -> PeriodicGenerator | None:
    """Pick the preferred generator: T-periodic first, then by provenance."""
    for provenance in _PROVENANCE_PREFERENCE:
        for g in generators:
            if g.period_multiple == 1 and g.provenance == provenance:
                return g
    for g in generators:
        if g.period_multiple == 2:
            return g
    return None
