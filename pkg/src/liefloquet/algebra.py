"""Finite-dimensional real Lie algebras given by structure constants.

An algebra is a validated rank-3 tensor ``lam`` with ``[e_i, e_j] =
sum_k lam[i,j,k] e_k``.  Storage is 0-based; every documented index and the
JSON interchange format are 1-based.  Vectors are plain 1-d numpy arrays of
coordinates in the defining basis, operators are (n, n) arrays acting on
coordinate columns.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

JACOBI_TOL = 1e-12
RANK_TOL = 1e-10
CENTER_TOL = 1e-10

__all__ = [
    "LieAlgebra",
    "AlgebraError",
    "AntisymmetryViolation",
    "JacobiViolation",
    "DimensionMismatch",
    "build_algebra",
    "bracket",
    "ad_matrix",
    "ad_basis",
    "killing_gram",
    "killing_pairing",
    "center",
    "is_semisimple",
    "quotient_by_center",
    "jacobi_residual",
    "preset_algebra",
    "PRESET_NAMES",
    "algebra_from_dict",
    "algebra_to_dict",
]


class AlgebraError(ValueError):
    pass


class AntisymmetryViolation(AlgebraError):
    def __init__(self, i: int, j: int, k: int, left: float, right: float):
        super().__init__(
            f"antisymmetry violated at (i, j, k) = ({i}, {j}, {k}): "
            f"lam[{i},{j},{k}] = {left!r} but -lam[{j},{i},{k}] = {-right!r}"
        )
        self.indices = (i, j, k)


class JacobiViolation(AlgebraError):
    def __init__(self, i: int, j: int, k: int, r: int, residual: float):
        super().__init__(
            f"Jacobi identity violated at (i, j, k, r) = ({i}, {j}, {k}, {r}): "
            f"residual {residual!r}"
        )
        self.indices = (i, j, k, r)
        self.residual = residual


class DimensionMismatch(AlgebraError):
    pass


@dataclass(frozen=True, eq=False)
class LieAlgebra:
    """Validated structure constants; immutable, safe to share across threads."""

    dim: int
    constants: np.ndarray  # (n, n, n); constants[i, j, k] multiplies e_k in [e_i, e_j]
    labels: tuple[str, ...]

    def __repr__(self) -> str:  # the tensor is noise in tracebacks
        return f"LieAlgebra(dim={self.dim}, labels={self.labels!r})"


def _check_vector(A: LieAlgebra, x: np.ndarray, name: str = "vector") -> np.ndarray:
    x = np.asarray(x, dtype=complex if np.iscomplexobj(x) else float)
    if x.shape != (A.dim,):
        raise DimensionMismatch(f"{name} has shape {x.shape}, expected ({A.dim},)")
    return x


def jacobi_residual(constants: np.ndarray) -> tuple[float, tuple[int, int, int, int]]:
    """Worst Jacobi residual of a constants tensor and its 1-based indices."""
    lam = constants
    jac = (
        np.einsum("ijm,mkr->ijkr", lam, lam)
        + np.einsum("jkm,mir->ijkr", lam, lam)
        + np.einsum("kim,mjr->ijkr", lam, lam)
    )
    flat = np.argmax(np.abs(jac))
    idx = np.unravel_index(flat, jac.shape)
    return float(np.abs(jac[idx])), tuple(int(v) + 1 for v in idx)


def build_algebra(
    dim: int,
    constants: np.ndarray,
    labels: tuple[str, ...] | None = None,
    jacobi_tol: float = JACOBI_TOL,
) -> LieAlgebra:
    """Validate a structure-constants tensor and wrap it as a :class:`LieAlgebra`.

    Antisymmetry ``lam[i,j,k] == -lam[j,i,k]`` is required exactly; the Jacobi
    identity is required within ``jacobi_tol`` in absolute value.
    """
    if dim < 1:
        raise AlgebraError(f"dimension must be positive, got {dim}")
    lam = np.array(constants, dtype=float)
    if lam.shape != (dim, dim, dim):
        raise AlgebraError(f"constants have shape {lam.shape}, expected {(dim,) * 3}")

    mismatch = lam != -lam.transpose(1, 0, 2)
    if mismatch.any():
        i, j, k = (int(v) for v in np.argwhere(mismatch)[0])
        raise AntisymmetryViolation(i + 1, j + 1, k + 1, lam[i, j, k], lam[j, i, k])

    worst, idx = jacobi_residual(lam)
    if worst > jacobi_tol:
        raise JacobiViolation(*idx, worst)

    if labels is None:
        labels = tuple(f"e{i + 1}" for i in range(dim))
    elif len(labels) != dim:
        raise AlgebraError(f"{len(labels)} labels for dimension {dim}")

    lam.setflags(write=False)
    return LieAlgebra(dim=dim, constants=lam, labels=tuple(labels))


def bracket(A: LieAlgebra, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """[x, y] in coordinates; bilinear, accepts complex vectors."""
    x = _check_vector(A, x, "x")
    y = _check_vector(A, y, "y")
    return np.einsum("i,j,ijk->k", x, y, A.constants)


def ad_matrix(A: LieAlgebra, x: np.ndarray) -> np.ndarray:
    """Matrix of ad_x = [x, .]; column j holds the coordinates of [x, e_j]."""
    x = _check_vector(A, x, "x")
    return np.tensordot(x, A.constants, axes=(0, 0)).T


def ad_basis(A: LieAlgebra) -> np.ndarray:
    """Stack of the basis adjoint matrices, shape (n, n, n) with AD[i] = ad_{e_i}."""
    return A.constants.transpose(0, 2, 1)


def killing_gram(A: LieAlgebra) -> np.ndarray:
    """Gram matrix of <x, y> = -tr(ad_x ad_y) in the defining basis."""
    AD = ad_basis(A)
    return -np.einsum("iab,jba->ij", AD, AD)


def killing_pairing(A: LieAlgebra, x: np.ndarray, y: np.ndarray) -> float:
    """<x, y> = -tr(ad_x ad_y) for real coordinate vectors."""
    G = killing_gram(A)
    return float(np.asarray(x) @ G @ np.asarray(y))


def _sign_normalize(v: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    for comp in v:
        if abs(comp) > tol:
            return -v if comp < 0 else v
    return v


def center(A: LieAlgebra) -> np.ndarray:
    """Orthonormal basis of the center as rows of a (k, n) array; k may be 0.

    The center is the common nullspace of the basis adjoint maps, computed
    from the stacked (n^2, n) matrix with a relative singular-value threshold.
    """
    n = A.dim
    stacked = ad_basis(A).reshape(n * n, n)
    _, s, vt = np.linalg.svd(stacked)
    smax = s[0] if s.size and s[0] > 0.0 else 1.0
    rank = int(np.count_nonzero(s > CENTER_TOL * smax))
    rows = vt[rank:]
    return np.array([_sign_normalize(r) for r in rows]) if rows.size else rows.reshape(0, n)


def is_semisimple(A: LieAlgebra) -> bool:
    """True iff the Killing form is nondegenerate (relative threshold 1e-10)."""
    s = np.linalg.svd(killing_gram(A), compute_uv=False)
    if s[0] == 0.0:
        return False
    return bool(s[-1] > RANK_TOL * s[0])


def quotient_by_center(A: LieAlgebra) -> tuple[LieAlgebra, np.ndarray, list[np.ndarray]]:
    """Quotient algebra by the center with coordinate maps.

    Returns ``(quotient, projection, section)`` where ``projection`` is the
    (m, n) map from coordinates on the algebra onto quotient coordinates and
    ``section`` lists the m complement basis vectors inside the algebra.  The
    complement is the Euclidean orthogonal complement of the center,
    orthonormalized by Gram-Schmidt over the standard basis.
    """
    n = A.dim
    zbasis = center(A)

    comp: list[np.ndarray] = []
    for i in range(n):
        v = np.zeros(n)
        v[i] = 1.0
        for z in zbasis:
            v = v - (z @ v) * z
        for u in comp:
            v = v - (u @ v) * u
        norm = float(np.linalg.norm(v))
        if norm > RANK_TOL:
            comp.append(v / norm)
    m = n - len(zbasis)
    if len(comp) != m:
        raise AlgebraError("internal: complement dimension does not match the center")

    if m == 0:
        raise AlgebraError("the algebra is abelian; the quotient by the center is zero-dimensional")

    section = [c.copy() for c in comp]
    projection = np.array(comp)

    lam_q = np.zeros((m, m, m))
    for i in range(m):
        for j in range(i + 1, m):
            w = projection @ bracket(A, section[i], section[j])
            lam_q[i, j] = w
            lam_q[j, i] = -w

    quotient = build_algebra(m, lam_q, tuple(f"k{i + 1}" for i in range(m)))
    return quotient, projection, section


# ---------------------------------------------------------------------------
# presets and JSON interchange
# ---------------------------------------------------------------------------

# sparse entries are (i, j, k, c) with 1-based indices; both orderings explicit
_PRESET_ENTRIES: dict[str, tuple[int, list[tuple[int, int, int, float]]]] = {
    "sp1R": (3, [(1, 2, 3, -1.0), (2, 1, 3, 1.0),
                 (2, 3, 1, 1.0), (3, 2, 1, -1.0),
                 (3, 1, 2, 1.0), (1, 3, 2, -1.0)]),
    "so3": (3, [(1, 2, 3, 1.0), (2, 1, 3, -1.0),
                (2, 3, 1, 1.0), (3, 2, 1, -1.0),
                (3, 1, 2, 1.0), (1, 3, 2, -1.0)]),
    "heisenberg3": (3, [(1, 2, 3, 1.0), (2, 1, 3, -1.0)]),
}

PRESET_NAMES = tuple(_PRESET_ENTRIES) + ("abelian<n>",)

_ABELIAN_RE = re.compile(r"^abelian(\d+)$")


def preset_algebra(name: str) -> LieAlgebra:
    """Bundled algebras: ``sp1R``, ``so3``, ``heisenberg3``, ``abelian<n>``."""
    m = _ABELIAN_RE.match(name)
    if m:
        n = int(m.group(1))
        if n < 1:
            raise AlgebraError(f"abelian dimension must be positive: {name!r}")
        return build_algebra(n, np.zeros((n, n, n)))
    if name not in _PRESET_ENTRIES:
        raise AlgebraError(f"unknown algebra preset {name!r}; known: {', '.join(PRESET_NAMES)}")
    dim, entries = _PRESET_ENTRIES[name]
    lam = np.zeros((dim, dim, dim))
    for i, j, k, c in entries:
        lam[i - 1, j - 1, k - 1] = c
    return build_algebra(dim, lam)


def algebra_from_dict(data: dict, jacobi_tol: float = JACOBI_TOL) -> LieAlgebra:
    """Build an algebra from the JSON object form.

    Expected shape: ``{"dim": n, "labels": [...], "brackets": [{"i": 1, "j": 2,
    "k": 3, "c": -1.0}, ...]}``.  Indices are 1-based.  Both orderings of every
    bracket must be listed unless ``"antisymmetric_completion": true`` asks for
    the mirror entries to be filled in automatically.
    """
    try:
        dim = int(data["dim"])
    except KeyError:
        raise AlgebraError("algebra object needs a 'dim' field") from None
    if dim < 1:
        raise AlgebraError(f"'dim' must be positive, got {dim}")
    entries = data.get("brackets", [])
    complete = bool(data.get("antisymmetric_completion", False))

    lam = np.zeros((dim, dim, dim))
    seen: set[tuple[int, int, int]] = set()
    for entry in entries:
        try:
            i, j, k, c = int(entry["i"]), int(entry["j"]), int(entry["k"]), float(entry["c"])
        except KeyError as err:
            raise AlgebraError(f"bracket entry {entry!r} is missing field {err}") from None
        for name, v in (("i", i), ("j", j), ("k", k)):
            if not 1 <= v <= dim:
                raise AlgebraError(f"bracket index {name}={v} out of range 1..{dim}")
        key = (i, j, k)
        if key in seen:
            raise AlgebraError(f"duplicate bracket entry for (i, j, k) = {key}")
        seen.add(key)
        lam[i - 1, j - 1, k - 1] = c
    if complete:
        for i, j, k in list(seen):
            if (j, i, k) not in seen:
                lam[j - 1, i - 1, k - 1] = -lam[i - 1, j - 1, k - 1]

    labels = data.get("labels")
    return build_algebra(dim, lam, tuple(labels) if labels else None, jacobi_tol=jacobi_tol)


def algebra_to_dict(A: LieAlgebra) -> dict:
    """Inverse of :func:`algebra_from_dict`; lists both orderings explicitly."""
    entries = []
    for (i, j, k), c in np.ndenumerate(A.constants):
        if c != 0.0:
            entries.append({"i": i + 1, "j": j + 1, "k": k + 1, "c": float(c)})
    return {"dim": A.dim, "labels": list(A.labels), "brackets": entries}


def load_algebra(spec: "str | dict", jacobi_tol: float = JACOBI_TOL) -> LieAlgebra:
    """Resolve a preset name or a JSON object into an algebra."""
    if isinstance(spec, str):
        return preset_algebra(spec)
    return algebra_from_dict(spec, jacobi_tol=jacobi_tol)
