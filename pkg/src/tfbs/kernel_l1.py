"""Nonuniform tempered L1 coefficients and the direct discrete operator.

The discrete tempered Caputo derivative of order alpha with tempering
rate lambda at level n is

    D v(tau_n) = (1/Gamma(1-alpha)) * [ a_n v^n
                 - sum_{k=1}^{n-1} (a_{k+1} - a_k) e^{lambda(tau_k - tau_n)} v^k
                 - a_1 e^{-lambda tau_n} v^0 ]

with mean-value weights a_k over the graded mesh.  The weights are always
evaluated through the round-off-stable expm1/log1p reformulation; the
naive difference of fractional powers cancels catastrophically on
strongly graded meshes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from tfbs.mesh import GradedMesh


@dataclass(frozen=True)
class L1Weights:
    """Weights a_1..a_n for one mesh level; strictly increasing in k."""

    n: int
    alpha: float
    a: np.ndarray


def l1_weights(mesh: GradedMesh, n: int, alpha: float) -> L1Weights:
    """Stable evaluation of the L1 weights a_k, k = 1..n.

    a_n = 1/((1-alpha) * dtau_n**alpha); for k < n
    a_k = -(tau_n - tau_{k-1})**(1-alpha) / ((1-alpha) dtau_k)
          * expm1((1-alpha) * log1p(-dtau_k / (tau_n - tau_{k-1}))).
    """
    if not (0.0 < alpha < 1.0):
        raise ValueError("alpha must lie in (0, 1)")
    if not (1 <= n <= mesh.M):
        raise ValueError("level index n out of range")
    a = np.empty(n)
    one_m_alpha = 1.0 - alpha
    if n > 1:
        d_prev = mesh.levels[n] - mesh.levels[: n - 1]  # tau_n - tau_{k-1}, k=1..n-1
        dtau = mesh.steps[: n - 1]
        a[: n - 1] = (
            -(d_prev**one_m_alpha)
            / (one_m_alpha * dtau)
            * np.expm1(one_m_alpha * np.log1p(-dtau / d_prev))
        )
    a[n - 1] = 1.0 / (one_m_alpha * mesh.steps[n - 1] ** alpha)
    a.setflags(write=False)
    return L1Weights(n=int(n), alpha=float(alpha), a=a)


def tempered_l1_split(
    history: np.ndarray,
    weights: L1Weights,
    mesh: GradedMesh,
    alpha: float,
    lam: float,
    n: int,
) -> tuple[float, np.ndarray | float]:
    """Split form of the discrete operator for implicit solves.

    Returns (diag, lag) such that the operator value at level n is
    diag * v^n - lag, where lag collects all known history terms.
    ``history`` holds v^0..v^{n-1} (or v^0..v^n; the level-n entry is
    ignored) along axis 0; entries may be scalars or nodal vectors.
    """
    if lam < 0.0:
        raise ValueError("lambda must be >= 0")
    if weights.n != n or abs(weights.alpha - alpha) > 0.0:
        raise ValueError("weights do not match the requested level/order")
    history = np.asarray(history, dtype=float)
    if history.shape[0] < n:
        raise ValueError("history must hold levels 0..n-1")
    inv_gamma = 1.0 / math.gamma(1.0 - alpha)
    a = weights.a
    diag = a[n - 1] * inv_gamma
    damp0 = math.exp(-lam * mesh.levels[n])
    lag = inv_gamma * a[0] * damp0 * history[0]
    if n > 1:
        damp = np.exp(lam * (mesh.levels[1:n] - mesh.levels[n]))
        coeffs = inv_gamma * np.diff(a) * damp
        lag = lag + np.tensordot(coeffs, history[1:n], axes=(0, 0))
    return diag, lag


def apply_tempered_l1(
    history: np.ndarray,
    weights: L1Weights,
    mesh: GradedMesh,
    alpha: float,
    lam: float,
    n: int,
) -> np.ndarray | float:
    """Discrete tempered Caputo derivative at level n from v^0..v^n."""
    history = np.asarray(history, dtype=float)
    if history.shape[0] < n + 1:
        raise ValueError("history must hold levels 0..n")
    diag, lag = tempered_l1_split(history, weights, mesh, alpha, lam, n)
    return diag * history[n] - lag
