"""Compact fourth-order spatial operators and the tridiagonal solver."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class TridiagonalSystem:
    """Tridiagonal system over interior nodes; diagonally dominant by construction."""

    sub: np.ndarray
    main: np.ndarray
    sup: np.ndarray
    rhs: np.ndarray


def apply_compact(f: np.ndarray) -> np.ndarray:
    """Compact average (f_{i-1} + 10 f_i + f_{i+1})/12 at interior nodes.

    Boundary nodes pass through unchanged.
    """
    f = np.asarray(f, dtype=float)
    out = f.copy()
    out[1:-1] = (f[:-2] + 10.0 * f[1:-1] + f[2:]) / 12.0
    return out


def apply_second_difference(f: np.ndarray, h: float) -> np.ndarray:
    """Central second difference (f_{i+1} - 2 f_i + f_{i-1})/h^2, interior only."""
    f = np.asarray(f, dtype=float)
    return (f[2:] - 2.0 * f[1:-1] + f[:-2]) / (h * h)


def solve_tridiagonal(system: TridiagonalSystem) -> np.ndarray:
    """Double-sweep (Thomas) solve without pivoting.

    Safe under the strict diagonal dominance every assembled step matrix
    satisfies; a vanishing pivot is reported rather than divided through.
    """
    sub, main, sup, rhs = system.sub, system.main, system.sup, system.rhs
    n = main.size
    if rhs.size != n or sub.size != n - 1 or sup.size != n - 1:
        raise ValueError("inconsistent system dimensions")
    w = np.empty(n - 1) if n > 1 else np.empty(0)
    g = np.empty(n)
    beta = main[0]
    if beta == 0.0:
        raise ZeroDivisionError("zero pivot in tridiagonal solve")
    g[0] = rhs[0] / beta
    for i in range(1, n):
        w[i - 1] = sup[i - 1] / beta
        beta = main[i] - sub[i - 1] * w[i - 1]
        if beta == 0.0:
            raise ZeroDivisionError("zero pivot in tridiagonal solve")
        g[i] = (rhs[i] - sub[i - 1] * g[i - 1]) / beta
    x = g
    for i in range(n - 2, -1, -1):
        x[i] -= w[i] * x[i + 1]
    return x
