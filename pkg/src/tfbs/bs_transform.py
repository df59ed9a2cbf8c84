"""Transforms between the Black-Scholes model and the homogeneous form.

With tau = T - t and x = ln S, the pricing equation becomes an
advection-diffusion-reaction equation in (x, tau).  Subtracting the
linear-in-x boundary interpolant z(x, tau) and multiplying by
k(x) = exp(c (x - x_l)/sigma^2) removes the boundary data and the
first-derivative term, leaving the homogeneous-BC diffusion-reaction
problem the schemes integrate.  The boundary lift contributes a
tempered-fractional memory term of the boundary functions to the source;
it is taken from a registered closed form when available and otherwise
tabulated numerically with the same L1 operator on the same mesh.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from tfbs.kernel_l1 import l1_weights, tempered_l1_split
from tfbs.mesh import GradedMesh, SpatialGrid, build_spatial_grid
from tfbs.schemes import Solution, TtfdrProblem

TimeFn = Callable[[float], float]


@dataclass(frozen=True)
class TemperedBsModel:
    """Tempered time-fractional Black-Scholes model on a truncated log-price domain.

    Boundary functions phi (left) and psi (right) are functions of
    tau = T - t; None means identically zero.  ``memory_phi``/``memory_psi``
    are optional closed forms of the tempered Caputo derivative of the
    boundary data; without them a numeric fallback is used.  ``f`` is an
    optional manufactured source in (x, tau).
    """

    r: float
    D: float
    sigma: float
    lam: float
    alpha: float
    T: float
    x_l: float
    x_r: float
    initial_x: Callable[[np.ndarray], np.ndarray]
    phi: TimeFn | None = None
    psi: TimeFn | None = None
    memory_phi: TimeFn | None = None
    memory_psi: TimeFn | None = None
    f: Callable[[np.ndarray, float], np.ndarray] | None = None
    K: float | None = None

    @property
    def r_hat(self) -> float:
        return self.r - self.D

    @property
    def c(self) -> float:
        return self.r_hat - 0.5 * self.sigma**2

    @property
    def q(self) -> float:
        return self.c**2 / (2.0 * self.sigma**2) + self.r

    def k(self, x: np.ndarray | float) -> np.ndarray | float:
        """Exponential factor removing the advection term."""
        return np.exp(self.c * (np.asarray(x) - self.x_l) / self.sigma**2)

    def z(self, x: np.ndarray | float, tau: float) -> np.ndarray | float:
        """Linear-in-x interpolant of the boundary values at time tau."""
        lo = self.phi(tau) if self.phi is not None else 0.0
        hi = self.psi(tau) if self.psi is not None else 0.0
        frac = (np.asarray(x) - self.x_l) / (self.x_r - self.x_l)
        return lo + (hi - lo) * frac


def boundary_memory_numeric(
    func: TimeFn, mesh: GradedMesh, alpha: float, lam: float
) -> np.ndarray:
    """Tempered L1 operator applied to a sampled time function, per level."""
    vals = np.array([func(float(t)) for t in mesh.levels])
    out = np.zeros(mesh.M + 1)
    for n in range(1, mesh.M + 1):
        weights = l1_weights(mesh, n, alpha)
        diag, lag = tempered_l1_split(vals, weights, mesh, alpha, lam, n)
        out[n] = diag * vals[n] - lag
    return out


def _memory_table(
    boundary: TimeFn | None,
    registered: TimeFn | None,
    mesh: GradedMesh | None,
    alpha: float,
    lam: float,
) -> Callable[[float, int], float]:
    if boundary is None:
        return lambda tau, n: 0.0
    if registered is not None:
        return lambda tau, n: registered(tau)
    if mesh is None:
        raise ValueError(
            "nonzero boundary without a registered memory term needs a mesh "
            "for the numeric fallback"
        )
    table = boundary_memory_numeric(boundary, mesh, alpha, lam)
    return lambda tau, n: float(table[n])


def to_ttfdr(model: TemperedBsModel, mesh: GradedMesh | None = None) -> TtfdrProblem:
    """Build the homogeneous-BC problem the schemes integrate.

    ``mesh`` is only required when a nonzero boundary lacks a registered
    memory closed form (the numeric fallback tabulates per mesh level).
    """
    phi = model.phi
    psi = model.psi
    mem_lo = _memory_table(phi, model.memory_phi, mesh, model.alpha, model.lam)
    mem_hi = _memory_table(psi, model.memory_psi, mesh, model.alpha, model.lam)
    width = model.x_r - model.x_l
    c = model.c
    r = model.r

    def initial_data(x: np.ndarray) -> np.ndarray:
        return model.k(x) * (np.asarray(model.initial_x(x), dtype=float) - model.z(x, 0.0))

    def source(x: np.ndarray, tau: float, n: int) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        lo = phi(tau) if phi is not None else 0.0
        hi = psi(tau) if psi is not None else 0.0
        frac = (x - model.x_l) / width
        z = lo + (hi - lo) * frac
        z_x = (hi - lo) / width
        mlo = mem_lo(tau, n)
        mhi = mem_hi(tau, n)
        mem = mlo + (mhi - mlo) * frac
        base = c * z_x - r * z - mem
        if model.f is not None:
            base = base + np.asarray(model.f(x, tau), dtype=float)
        return model.k(x) * base

    return TtfdrProblem(
        alpha=model.alpha,
        lam=model.lam,
        sigma=model.sigma,
        q=model.q,
        initial_data=initial_data,
        source=source,
        x_l=model.x_l,
        x_r=model.x_r,
        T=model.T,
    )


@dataclass(frozen=True)
class PriceSurface:
    """Option prices C(S_i, t_n) on the truncated domain; t = T - tau."""

    S: np.ndarray
    t: np.ndarray
    C: np.ndarray


def from_ttfdr(solution: Solution, model: TemperedBsModel) -> PriceSurface:
    """Map a transformed-field solution back to option prices."""
    x = solution.grid.nodes
    k = np.asarray(model.k(x), dtype=float)
    taus = solution.mesh.levels
    C = np.empty_like(solution.layers)
    for n in range(taus.size):
        C[n] = solution.layers[n] / k + np.asarray(model.z(x, float(taus[n])), dtype=float)
    return PriceSurface(S=np.exp(x), t=model.T - taus, C=C)


def exact_v_field(
    model: TemperedBsModel, exact_U: Callable[[np.ndarray, float], np.ndarray]
) -> Callable[[np.ndarray, float], np.ndarray]:
    """Transformed field v = k(x) (U - z) of a known exact solution U."""

    def v(x: np.ndarray, tau: float) -> np.ndarray:
        return model.k(x) * (np.asarray(exact_U(x, tau), dtype=float) - model.z(x, tau))

    return v


def strike_aligned(model: TemperedBsModel, N: int) -> tuple[TemperedBsModel, SpatialGrid]:
    """Nudge x_r so ln K falls on a grid node; mitigates the payoff kink.

    Returns the adjusted model (same boundary data at the moved right
    boundary) together with the matching grid.
    """
    if model.K is None:
        raise ValueError("model has no strike")
    xk = math.log(model.K)
    if not (model.x_l < xk < model.x_r):
        raise ValueError("strike outside the truncated domain")
    h0 = (model.x_r - model.x_l) / N
    j = max(1, min(N - 1, round((xk - model.x_l) / h0)))
    h = (xk - model.x_l) / j
    x_r = model.x_l + N * h
    moved = dataclasses.replace(model, x_r=x_r)
    return moved, build_spatial_grid(model.x_l, x_r, N)
