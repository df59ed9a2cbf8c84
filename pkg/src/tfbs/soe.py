"""Sum-of-exponentials compression of the kernel tau**(-alpha).

Construction.  Substituting s = e^y into the integral representation
tau**(-alpha) = (1/Gamma(alpha)) * int_0^inf e^{-tau s} s^{alpha-1} ds
gives an integrand analytic in a horizontal strip, so the uniform
trapezoid rule in y converges geometrically in 1/h.  The rule is
truncated above at s_max ~ log(1/eps)/delta.  Below a fixed cut s_cut
the remaining (infinite) trapezoid tail acts on [delta, T] only through
slowly varying exponentials e^{-s tau} with s*tau <= s_cut*T, so the
whole tail is collapsed into a small Gauss rule matched to its power
moments, which are available in closed form as geometric series.

All construction arithmetic and the a-posteriori verification run in
extended precision (numpy longdouble) with compensated summation: the
verified bound is absolute on [delta, T] while the kernel itself grows
like delta**(-alpha), so double-precision round-off in the weights or
in the verification sum would otherwise dominate the measurement.

The fast history recurrence for the discrete tempered Caputo operator
(accumulators F_j, one per mode) lives here as well.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath as mp
import numpy as np

from tfbs.kernel_l1 import l1_weights
from tfbs.mesh import GradedMesh

_LD = np.longdouble
_LD_EPS = float(np.finfo(_LD).eps)


class SoeConstructionError(RuntimeError):
    """Raised when the assembled kernel fails its verified error bound."""


@dataclass(frozen=True)
class SoeKernel:
    """Exponents s_j and weights w_j with Sum w_j e^{-s_j tau} ~ tau**(-alpha)."""

    alpha: float
    eps: float
    delta: float
    T: float
    s: np.ndarray
    w: np.ndarray
    s_hi: np.ndarray
    w_hi: np.ndarray
    max_error: float

    @property
    def M_exp(self) -> int:
        return int(self.s.size)

    def evaluate(self, tau: np.ndarray | float) -> np.ndarray | float:
        """Approximant value(s) at tau in double precision."""
        tau = np.asarray(tau, dtype=float)
        return np.exp(-np.multiply.outer(tau, self.s)) @ self.w


@dataclass
class HistoryState:
    """Per-mode accumulators F_j at ``level`` plus the two latest layers.

    ``v_last`` is the solution layer at level-1 and ``v_prev`` the one at
    level-2 (None until two layers exist).  F holds F^{level}; it is only
    ever advanced by the one-step recurrence.
    """

    level: int
    F: np.ndarray
    v_last: np.ndarray | float
    v_prev: np.ndarray | float | None


def _gamma_hi(x: float) -> np.longdouble:
    """Gamma(x) accurate to longdouble precision via mpmath."""
    with mp.workdps(30):
        return _LD(mp.nstr(mp.gamma(mp.mpf(float(x))), 25))


def _gauss_from_moments(mu: np.ndarray, m: int) -> tuple[np.ndarray, np.ndarray]:
    """m-point Gauss rule for a positive measure given moments mu_0..mu_{2m+1}.

    Classical Golub-Welsch: Cholesky of the Hankel moment matrix yields the
    three-term recurrence coefficients; eigenvalues of the Jacobi matrix are
    the nodes.  The Cholesky runs in longdouble since moment matrices are
    notoriously ill-conditioned.
    """
    H = np.empty((m + 1, m + 1), dtype=_LD)
    for i in range(m + 1):
        for j in range(m + 1):
            H[i, j] = mu[i + j]
    # longdouble Cholesky by hand (numpy.linalg would downcast)
    L = np.zeros((m + 1, m + 1), dtype=_LD)
    for i in range(m + 1):
        for j in range(i + 1):
            acc = H[i, j]
            for k in range(j):
                acc -= L[i, k] * L[j, k]
            if i == j:
                if acc <= 0:
                    raise SoeConstructionError("moment matrix not positive definite")
                L[i, i] = np.sqrt(acc)
            else:
                L[i, j] = acc / L[j, j]
    a = np.empty(m, dtype=_LD)
    b = np.empty(max(m - 1, 0), dtype=_LD)
    for j in range(m):
        a[j] = L[j + 1, j] / L[j, j] - (L[j, j - 1] / L[j - 1, j - 1] if j > 0 else _LD(0))
        if j < m - 1:
            b[j] = L[j + 1, j + 1] / L[j, j]
    J = np.diag(a.astype(float)) + np.diag(b.astype(float), 1) + np.diag(b.astype(float), -1)
    vals, vecs = np.linalg.eigh(J)
    nodes = vals
    weights = float(mu[0]) * vecs[0, :] ** 2
    return nodes, weights


def _max_kernel_error(
    s_hi: np.ndarray, w_hi: np.ndarray, alpha: float, delta: float, T: float, npts: int
) -> tuple[float, float]:
    """Max |tau**(-alpha) - Sum w e^{-s tau}| on a log-spaced grid.

    Longdouble arithmetic with Kahan-compensated summation over modes, so
    the measurement reflects the kernel, not the evaluation's own noise.
    """
    al = _LD(alpha)
    worst = _LD(0)
    worst_tau = delta
    chunk = 8192
    taus = np.logspace(math.log10(delta), math.log10(T), npts).astype(_LD)
    taus[0] = _LD(delta)
    taus[-1] = _LD(T)
    for lo in range(0, npts, chunk):
        t = taus[lo : lo + chunk]
        acc = np.zeros(t.shape, dtype=_LD)
        comp = np.zeros(t.shape, dtype=_LD)
        for sj, wj in zip(s_hi, w_hi):
            # skip the underflowed tail: w e^{-s tau} < e^{-80} w is far
            # below any tolerance this construction targets
            cut = (80.0 + math.log(max(float(wj), 1.0))) / float(sj)
            k = int(np.searchsorted(t, cut, side="right"))
            if k == 0:
                continue
            term = wj * np.exp(-sj * t[:k])
            y = term - comp[:k]
            tot = acc[:k] + y
            comp[:k] = (tot - acc[:k]) - y
            acc[:k] = tot
        err = np.abs(acc - t**(-al))
        i = int(np.argmax(err))
        if err[i] > worst:
            worst = err[i]
            worst_tau = float(t[i])
    return float(worst), worst_tau


def build_soe_kernel(
    alpha: float,
    eps: float,
    delta: float,
    T: float,
    *,
    compressed_modes: int = 8,
    pad: float | None = None,
    tail_margin: float = 2.0,
    check_points: int = 100_000,
    enforce: bool = True,
) -> SoeKernel:
    """Build and verify an SOE kernel for tau**(-alpha) on [delta, T].

    The trapezoid error is relative and decays like e^{-pi^2/h} (the
    integrand is analytic in the strip |Im y| < pi/2; the observed rate
    matches the strip edge).  The spacing targets the absolute bound eps
    at the worst point tau = delta with a log-margin ``pad``; the error
    prefactor grows with alpha, so the default margin does too.  The
    upper truncation keeps the dropped integral tail below
    eps/``tail_margin``.

    Verification failure raises SoeConstructionError.  The rejection
    threshold is eps, relaxed only by the extended-precision round-off
    floor ~ eps_longdouble * delta**(-alpha), below which no verification
    in this arithmetic can certify anything.
    """
    if not (0.0 < alpha < 1.0):
        raise ValueError("alpha must lie in (0, 1)")
    if eps <= 0.0:
        raise ValueError("eps must be positive")
    if not (0.0 < delta < T):
        raise ValueError("require 0 < delta < T")

    al = _LD(alpha)
    gamma_al = _gamma_hi(alpha)

    if pad is None:
        pad = 1.2 + max(0.0, 5.2 * alpha - 1.7)

    # relative accuracy needed at the worst point tau = delta
    peak = max(1.0, delta ** (-alpha))
    h = math.pi**2 / (math.log(peak / eps) + pad)

    # upper cutoff: tail of the s^{alpha-1} e^{-delta s} integral below eps
    x = 35.0
    for _ in range(80):
        x = math.log(max(2.0, x ** (alpha - 1.0) * delta ** (-alpha) / (eps / tail_margin)))
    s_max = x / delta

    s_cut = 2.0 / T
    K = int(math.floor(math.log(s_cut) / h))
    k_hi = int(math.ceil(math.log(s_max) / h))

    h_hi = _LD(h)
    # geometric-series moments of the discrete lower tail, scaled by s_cut
    m = compressed_modes
    mus = np.empty(2 * m + 2, dtype=_LD)
    for p in range(2 * m + 2):
        ap = al + p
        mus[p] = h_hi * np.exp(ap * _LD(K) * h_hi) / (1 - np.exp(-ap * h_hi))
        mus[p] = mus[p] / gamma_al / _LD(s_cut) ** p
    nodes, wts = _gauss_from_moments(mus, m)
    s_low = (nodes.astype(_LD)) * _LD(s_cut)
    w_low = wts.astype(_LD)

    ks = np.arange(K + 1, k_hi + 1)
    s_trap = np.exp(ks.astype(_LD) * h_hi)
    w_trap = h_hi * s_trap**al / gamma_al

    s_hi = np.concatenate([s_low, s_trap])
    w_hi = np.concatenate([w_low, w_trap])
    order = np.argsort(s_hi)
    s_hi = s_hi[order]
    w_hi = w_hi[order]
    if np.any(s_hi <= 0) or np.any(w_hi <= 0):
        raise SoeConstructionError("nonpositive exponent or weight in assembly")

    max_err, _ = _max_kernel_error(s_hi, w_hi, alpha, delta, T, check_points)
    floor = 20.0 * _LD_EPS * delta ** (-alpha)
    if enforce and max_err > max(eps, floor):
        raise SoeConstructionError(
            f"kernel bound failed: max error {max_err:.3e} > eps {eps:.1e} "
            f"(round-off floor {floor:.1e})"
        )
    return SoeKernel(
        alpha=float(alpha),
        eps=float(eps),
        delta=float(delta),
        T=float(T),
        s=s_hi.astype(float),
        w=w_hi.astype(float),
        s_hi=s_hi,
        w_hi=w_hi,
        max_error=max_err,
    )


def kernel_error_profile(kernel: SoeKernel, npts: int = 2000) -> tuple[np.ndarray, np.ndarray]:
    """(tau, |error|) sampled log-uniformly on [delta, T], for diagnostics."""
    taus = np.logspace(math.log10(kernel.delta), math.log10(kernel.T), npts).astype(_LD)
    errs = np.empty(npts)
    chunk = 8192
    al = _LD(kernel.alpha)
    for lo in range(0, npts, chunk):
        t = taus[lo : lo + chunk]
        acc = np.zeros(t.shape, dtype=_LD)
        comp = np.zeros(t.shape, dtype=_LD)
        for sj, wj in zip(kernel.s_hi, kernel.w_hi):
            term = wj * np.exp(-sj * t)
            y = term - comp
            tot = acc + y
            comp = (tot - acc) - y
            acc = tot
        errs[lo : lo + chunk] = np.abs(acc - t**(-al)).astype(float)
    return taus.astype(float), errs


def _step_coefficients(s: np.ndarray, gap: float, dtau_prev: float) -> np.ndarray:
    """B^n for all modes: e^{-s*gap} * (1 - e^{-s*dtau_prev})/(s*dtau_prev).

    gap = tau_n - tau_{n-1}.  The (1 - e^{-x})/x factor is evaluated with
    expm1, which is stable for all x; the x = 0 limit is 1.
    """
    x = s * dtau_prev
    ratio = np.where(x == 0.0, 1.0, -np.expm1(-x) / np.where(x == 0.0, 1.0, x))
    return np.exp(-s * gap) * ratio


def history_step_coefficient(kernel: SoeKernel, mesh: GradedMesh, n: int, j: int) -> float:
    """B_j^n = (1/dtau_{n-1}) int_{tau_{n-2}}^{tau_{n-1}} e^{-s_j (tau_n - s)} ds."""
    if n < 2:
        raise ValueError("history coefficients exist for n >= 2 only")
    gap = mesh.levels[n] - mesh.levels[n - 1]
    return float(_step_coefficients(kernel.s[j : j + 1], gap, mesh.steps[n - 2])[0])


def initial_history(kernel: SoeKernel, v0: np.ndarray | float) -> HistoryState:
    """State at level 1: F^1 = 0, latest layer v^0."""
    v0 = np.asarray(v0, dtype=float)
    width = v0.shape if v0.ndim else ()
    F = np.zeros((kernel.M_exp,) + width)
    return HistoryState(level=1, F=F, v_last=v0 if v0.ndim else float(v0), v_prev=None)


def push_layer(state: HistoryState, v_new: np.ndarray | float) -> HistoryState:
    """Record a freshly computed solution layer (keeps the last two)."""
    return HistoryState(level=state.level, F=state.F, v_last=v_new, v_prev=state.v_last)


def update_history(
    state: HistoryState, kernel: SoeKernel, mesh: GradedMesh, lam: float, n: int
) -> HistoryState:
    """Advance the accumulators: F^n = e^{-s dtau_n} F^{n-1} + B^n du.

    du is the u-variable difference e^{lam tau_{n-1}} v^{n-1}
    - e^{lam tau_{n-2}} v^{n-2} of the two retained layers.
    """
    if n != state.level + 1:
        raise ValueError("history must be advanced one level at a time")
    if state.v_prev is None:
        raise ValueError("two layers are required before the first update")
    decay = np.exp(-kernel.s * mesh.steps[n - 1])
    B = _step_coefficients(kernel.s, float(mesh.steps[n - 1]), float(mesh.steps[n - 2]))
    du = math.exp(lam * mesh.levels[n - 1]) * np.asarray(state.v_last) - math.exp(
        lam * mesh.levels[n - 2]
    ) * np.asarray(state.v_prev)
    if du.ndim == 0:
        F = decay * state.F + B * float(du)
    else:
        F = decay[:, None] * state.F + B[:, None] * du[None, :]
    return HistoryState(level=n, F=F, v_last=state.v_last, v_prev=state.v_prev)


def fast_tempered_l1_split(
    state: HistoryState, kernel: SoeKernel, mesh: GradedMesh, alpha: float, lam: float, n: int
) -> tuple[float, np.ndarray | float]:
    """Split form (diag, lag) of the fast operator: value = diag*v^n - lag."""
    if n != state.level:
        raise ValueError("state level does not match the requested level")
    inv_gamma = 1.0 / math.gamma(1.0 - alpha)
    a_n = 1.0 / ((1.0 - alpha) * mesh.steps[n - 1] ** alpha)
    diag = a_n * inv_gamma
    damp = math.exp(-lam * mesh.levels[n])
    hist = np.tensordot(kernel.w, state.F, axes=(0, 0)) if n >= 2 else 0.0
    u_prev = math.exp(lam * mesh.levels[n - 1]) * np.asarray(state.v_last)
    lag = damp * inv_gamma * (a_n * u_prev - hist)
    return diag, lag if np.ndim(lag) else float(lag)


def apply_fast_tempered_l1(
    state: HistoryState,
    v_n: np.ndarray | float,
    kernel: SoeKernel,
    mesh: GradedMesh,
    alpha: float,
    lam: float,
    n: int,
) -> np.ndarray | float:
    """Fast discrete tempered Caputo derivative at level n."""
    diag, lag = fast_tempered_l1_split(state, kernel, mesh, alpha, lam, n)
    return diag * np.asarray(v_n, dtype=float) - lag


def b_weights(kernel: SoeKernel, mesh: GradedMesh, n: int, alpha: float) -> np.ndarray:
    """Analysis-form coefficients b_1..b_n of the fast operator.

    b_k is the exponential-sum analogue of the mean-value weight a_k for
    k < n; b_n = a_n exactly.  Used in tests and the stability monitor,
    not in the stepping loop.
    """
    b = np.empty(n)
    for k in range(1, n):
        gap = mesh.levels[n] - mesh.levels[k]
        Bk = _step_coefficients(kernel.s, float(gap), float(mesh.steps[k - 1]))
        b[k - 1] = float(kernel.w @ Bk)
    b[n - 1] = l1_weights(mesh, n, alpha).a[n - 1]
    return b
