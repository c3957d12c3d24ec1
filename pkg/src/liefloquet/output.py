"""Deterministic CSV emission.

Every float cell is written with 17 significant digits, so identical runs
produce byte-identical files and the values round-trip exactly.
"""

from __future__ import annotations

from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .dynamics import FirstIntegral, PhaseSpace, Trajectory, integral_values
from .floquet import FloquetClassification, PeriodicGenerator

__all__ = [
    "fmt",
    "write_csv",
    "write_xi_csv",
    "write_classification_csv",
    "write_generators_csv",
    "write_trajectory_csv",
]


def fmt(x: float) -> str:
    return f"{x:.17g}"


def write_csv(path: Path | str, header: Sequence[str], rows: Iterable[Sequence[str]]) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(row) + "\n")


def write_xi_csv(path: Path | str, times: np.ndarray, states: np.ndarray) -> None:
    """Columns: t, xi_1..xi_n."""
    n = states.shape[1]
    header = ["t"] + [f"xi_{i + 1}" for i in range(n)]
    rows = ([fmt(t)] + [fmt(v) for v in state] for t, state in zip(times, states))
    write_csv(path, header, rows)


def write_classification_csv(path: Path | str, cls: FloquetClassification) -> None:
    """Columns: re_lambda, im_lambda, abs_lambda, admissibility, tag."""
    header = ["re_lambda", "im_lambda", "abs_lambda", "admissibility", "tag"]
    rows = (
        [fmt(p.value.real), fmt(p.value.imag), fmt(abs(p.value)), fmt(p.admissibility), p.tag]
        for p in cls.eigenpairs
    )
    write_csv(path, header, rows)


def write_generators_csv(path: Path | str, generators: Sequence[PeriodicGenerator]) -> None:
    """Columns: xi_1..xi_n, period_multiple, provenance."""
    n = generators[0].vector.shape[0] if generators else 0
    header = [f"xi_{i + 1}" for i in range(n)] + ["period_multiple", "provenance"]
    rows = (
        [fmt(v) for v in g.vector] + [str(g.period_multiple), g.provenance]
        for g in generators
    )
    write_csv(path, header, rows)


def write_trajectory_csv(
    path: Path | str,
    traj: Trajectory,
    space: PhaseSpace,
    integrals: Sequence[FirstIntegral] = (),
) -> None:
    """Columns: t, q_1..q_m, p_1..p_m, I_1..I_r (one column per integral)."""
    header = ["t", *space.q_names, *space.p_names] + [f"I_{i + 1}" for i in range(len(integrals))]
    columns = [traj.times] + [traj.states[:, i] for i in range(traj.states.shape[1])]
    columns += [integral_values(I, traj) for I in integrals]
    table = np.column_stack(columns)
    rows = ([fmt(v) for v in row] for row in table)
    write_csv(path, header, rows)
