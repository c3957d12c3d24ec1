"""Independent oracles used by the test suite.

Everything here deliberately avoids the code paths it is used to check:
the matrix exponential is a plain scaling-and-squaring Taylor evaluation
(validated against closed-form rotations), derivatives are central finite
differences, and Poisson brackets can be taken by finite differences too.
"""

from __future__ import annotations

import numpy as np

from liefloquet.expressions import evaluate


def expm_ss(M: np.ndarray) -> np.ndarray:
    """Scaling-and-squaring Taylor exponential, accurate to ~1e-15 at this scale."""
    M = np.asarray(M, dtype=float)
    norm = np.linalg.norm(M, np.inf)
    s = max(0, int(np.ceil(np.log2(max(norm, 1e-300) / 0.25))))
    B = M / (2.0 ** s)
    X = np.eye(M.shape[0])
    term = np.eye(M.shape[0])
    for k in range(1, 30):
        term = term @ B / k
        X = X + term
    for _ in range(s):
        X = X @ X
    return X


def rotation_exp_so3_adjoint(axis: np.ndarray, angle: float) -> np.ndarray:
    """Closed-form exp(angle * K) for the unit-axis cross-product matrix K."""
    a = np.asarray(axis, dtype=float)
    a = a / np.linalg.norm(a)
    K = np.array([[0.0, -a[2], a[1]], [a[2], 0.0, -a[0]], [-a[1], a[0], 0.0]])
    return np.eye(3) + np.sin(angle) * K + (1.0 - np.cos(angle)) * (K @ K)


def central_difference(expr, var: str, env: dict, h: float = 1e-6) -> float:
    up = dict(env)
    dn = dict(env)
    up[var] = env[var] + h
    dn[var] = env[var] - h
    return (evaluate(expr, up) - evaluate(expr, dn)) / (2.0 * h)


def poisson_fd(f, g, space, x: np.ndarray, parameters=None, h: float = 1e-6) -> float:
    """{f, g}(x) by central differences: sum_a (f_p g_q - f_q g_p)."""
    env = space.env(x, parameters)
    total = 0.0
    for qa, pa in zip(space.q_names, space.p_names):
        total += central_difference(f, pa, env, h) * central_difference(g, qa, env, h)
        total -= central_difference(f, qa, env, h) * central_difference(g, pa, env, h)
    return total


def mp_monodromy_exact(omega0: float) -> np.ndarray:
    """Monodromy of the constant-frequency oscillator system over one period.

    For constant omega0 the Euler right-hand side is the constant matrix
    [[0, -beta, alpha], [beta, 0, 0], [alpha, 0, 0]] with alpha = 1 - omega0^2
    and beta = omega0^2 + 1, so M = expm(2 pi A).
    """
    al = 1.0 - omega0 ** 2
    be = omega0 ** 2 + 1.0
    A = np.array([[0.0, -be, al], [be, 0.0, 0.0], [al, 0.0, 0.0]])
    return expm_ss(2.0 * np.pi * A)
