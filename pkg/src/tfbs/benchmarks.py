"""Benchmark problems: two manufactured-solution models and two options.

Examples 1 and 2 carry known exact solutions for convergence studies
(homogeneous and nonhomogeneous boundaries respectively).  Example 3 is
a double-barrier knock-out call, Example 4 a European put on a truncated
log-price domain with an analytic boundary-memory term.
"""

from __future__ import annotations

import math
from typing import Callable

import numpy as np

from tfbs.bs_transform import TemperedBsModel
from tfbs.mittag_leffler import ml2

ExactU = Callable[[np.ndarray, float], np.ndarray]


def example1(alpha: float, lam: float) -> tuple[TemperedBsModel, ExactU]:
    """Manufactured solution with homogeneous boundaries on x in (0, 1)."""
    r, D, sigma, T = 0.05, 0.0, 0.25, 1.0
    c = (r - D) - 0.5 * sigma**2
    g1a = math.gamma(1.0 + alpha)

    def f(x: np.ndarray, tau: float) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        s = np.sin(np.pi * x)
        grow = tau**alpha + 1.0
        return (
            5.0
            * math.exp(-lam * tau)
            * (
                g1a * s
                + 0.5 * sigma**2 * np.pi**2 * s * grow
                - c * np.pi * np.cos(np.pi * x) * grow
                + r * s * grow
            )
        )

    def exact_U(x: np.ndarray, tau: float) -> np.ndarray:
        return 5.0 * math.exp(-lam * tau) * (tau**alpha + 1.0) * np.sin(np.pi * np.asarray(x))

    model = TemperedBsModel(
        r=r,
        D=D,
        sigma=sigma,
        lam=lam,
        alpha=alpha,
        T=T,
        x_l=0.0,
        x_r=1.0,
        initial_x=lambda x: 5.0 * np.sin(np.pi * np.asarray(x, dtype=float)),
        f=f,
    )
    return model, exact_U


def example2(alpha: float, lam: float) -> tuple[TemperedBsModel, ExactU]:
    """Manufactured solution with nonhomogeneous boundaries on x in (0, 1)."""
    r, D, sigma, T = 0.03, 0.01, 0.45, 1.0
    c = (r - D) - 0.5 * sigma**2
    g1a = math.gamma(1.0 + alpha)

    def poly(x: np.ndarray) -> np.ndarray:
        return x**4 + x**3 + x**2 + 1.0

    def f(x: np.ndarray, tau: float) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        grow = tau**alpha + 1.0
        return math.exp(-lam * tau) * (
            g1a * poly(x)
            - 0.5 * sigma**2 * (12.0 * x**2 + 6.0 * x + 2.0) * grow
            - c * (4.0 * x**3 + 3.0 * x**2 + 2.0 * x) * grow
            + r * poly(x) * grow
        )

    def exact_U(x: np.ndarray, tau: float) -> np.ndarray:
        return math.exp(-lam * tau) * (tau**alpha + 1.0) * poly(np.asarray(x, dtype=float))

    # tempered derivative of e^{-lam tau}(tau^alpha + 1) is Gamma(1+alpha) e^{-lam tau}
    model = TemperedBsModel(
        r=r,
        D=D,
        sigma=sigma,
        lam=lam,
        alpha=alpha,
        T=T,
        x_l=0.0,
        x_r=1.0,
        initial_x=lambda x: poly(np.asarray(x, dtype=float)),
        phi=lambda tau: math.exp(-lam * tau) * (tau**alpha + 1.0),
        psi=lambda tau: 4.0 * math.exp(-lam * tau) * (tau**alpha + 1.0),
        memory_phi=lambda tau: g1a * math.exp(-lam * tau),
        memory_psi=lambda tau: 4.0 * g1a * math.exp(-lam * tau),
        f=f,
    )
    return model, exact_U


def example3(alpha: float, lam: float) -> TemperedBsModel:
    """Double-barrier knock-out call on (S_l, S_r) = (2, 15)."""
    r, D, sigma, T, K = 0.03, 0.01, 0.45, 1.0, 10.0
    return TemperedBsModel(
        r=r,
        D=D,
        sigma=sigma,
        lam=lam,
        alpha=alpha,
        T=T,
        x_l=math.log(2.0),
        x_r=math.log(15.0),
        initial_x=lambda x: np.maximum(np.exp(np.asarray(x, dtype=float)) - K, 0.0),
        K=K,
    )


def example4(alpha: float, lam: float) -> TemperedBsModel:
    """European put on the truncated domain S in [0.1, 100]."""
    r, D, sigma, T, K = 0.05, 0.0, 0.25, 1.0, 50.0

    def phi(tau: float) -> float:
        return K * math.exp(-r * tau)

    if lam == r:
        memory_phi = lambda tau: 0.0
    else:

        def memory_phi(tau: float) -> float:
            if tau == 0.0:
                return 0.0
            z = (lam - r) * tau
            return K * (lam - r) * math.exp(-lam * tau) * tau ** (1.0 - alpha) * ml2(
                1.0, 2.0 - alpha, z
            )

    return TemperedBsModel(
        r=r,
        D=D,
        sigma=sigma,
        lam=lam,
        alpha=alpha,
        T=T,
        x_l=math.log(0.1),
        x_r=math.log(100.0),
        initial_x=lambda x: np.maximum(K - np.exp(np.asarray(x, dtype=float)), 0.0),
        phi=phi,
        memory_phi=memory_phi,
        K=K,
    )


def recommended_gamma(alpha: float) -> float:
    """Grading used in the studies: gamma = (2 - alpha)/alpha rounded to
    the integer choices 4, 3, 2 for alpha = 0.3, 0.5, 0.8."""
    if abs(alpha - 0.3) < 1e-12:
        return 4.0
    if abs(alpha - 0.5) < 1e-12:
        return 3.0
    if abs(alpha - 0.8) < 1e-12:
        return 2.0
    return max(1.0, math.ceil((2.0 - alpha) / alpha))


def manufactured(example: int, alpha: float, lam: float) -> tuple[TemperedBsModel, ExactU]:
    if example == 1:
        return example1(alpha, lam)
    if example == 2:
        return example2(alpha, lam)
    raise ValueError("manufactured solutions exist for examples 1 and 2 only")


def pricing_model(example: int, alpha: float, lam: float) -> TemperedBsModel:
    if example == 3:
        return example3(alpha, lam)
    if example == 4:
        return example4(alpha, lam)
    raise ValueError("pricing models are examples 3 and 4")
