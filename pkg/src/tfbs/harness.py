"""Experiment harness: convergence studies, pricing runs, kernel diagnostics.

Produces the deterministic CSV artifacts behind the package's reference
tables and price curves.  Timings are wall-clock around the stepping loop
only and live in their own column so that the remaining output is
byte-identical between runs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from tfbs.benchmarks import manufactured, recommended_gamma, pricing_model
from tfbs.bs_transform import TemperedBsModel, from_ttfdr, strike_aligned, to_ttfdr
from tfbs.mesh import build_graded_mesh, build_spatial_grid, coupled_resolution
from tfbs.schemes import Solution, solve
from tfbs.soe import SoeConstructionError, build_soe_kernel, kernel_error_profile

__all__ = [
    "StudyConfig",
    "ConvergenceRow",
    "ConvergenceTable",
    "SolveFailure",
    "error_inf",
    "run_convergence_study",
    "PricingConfig",
    "PricingResult",
    "run_pricing",
    "SoeReport",
    "soe_check",
]


class SolveFailure(RuntimeError):
    """A scheme run failed; carries the underlying cause."""


def error_inf(
    solution: Solution,
    exact: Callable[[np.ndarray, float], np.ndarray],
    model: TemperedBsModel | None = None,
) -> float:
    """Maximum nodal error over all time levels.

    ``exact`` is a field function of (x, tau).  With ``model`` given the
    comparison happens on back-transformed option values (the original
    field); without it the raw solution layers are compared directly.
    """
    x = solution.grid.nodes
    levels = solution.mesh.levels
    if model is not None:
        numeric = from_ttfdr(solution, model).C
    else:
        numeric = solution.layers
    worst = 0.0
    for n, tau in enumerate(levels):
        diff = np.abs(numeric[n] - np.asarray(exact(x, float(tau)), dtype=float))
        worst = max(worst, float(diff.max()))
    return worst


@dataclass(frozen=True)
class StudyConfig:
    """A convergence study: one (example, alpha, gamma, lambda) block.

    ``ladder`` entries are N values in spatial mode and M values in
    temporal mode; each must double its predecessor so the log2-ratio
    order formula applies.  Fully deterministic: no RNG anywhere.
    """

    example: int
    alpha: float
    gamma: float
    lam: float = 1.0
    scheme: str = "both"
    mode: str = "spatial"
    ladder: tuple[int, ...] = (4, 8, 16)
    eps: float = 1e-12
    out: Path | None = None
    stability_monitor: bool = False

    def __post_init__(self) -> None:
        if self.mode not in ("spatial", "temporal"):
            raise ValueError("mode must be 'spatial' or 'temporal'")
        if self.scheme not in ("ds", "fs", "both"):
            raise ValueError("scheme must be 'ds', 'fs' or 'both'")
        if len(self.ladder) < 1:
            raise ValueError("ladder must be nonempty")
        if any(b != 2 * a for a, b in zip(self.ladder, self.ladder[1:])):
            raise ValueError("ladder entries must strictly double")

    @property
    def schemes(self) -> tuple[str, ...]:
        return ("ds", "fs") if self.scheme == "both" else (self.scheme,)


@dataclass(frozen=True)
class ConvergenceRow:
    alpha: float
    gamma: float
    N: int
    M: int
    err_inf: float
    order: float | None
    time_sec: float
    scheme: str
    failure: str | None = None


@dataclass(frozen=True)
class ConvergenceTable:
    rows: tuple[ConvergenceRow, ...]
    solutions: dict = field(default_factory=dict, compare=False, repr=False)

    CSV_HEADER = "alpha,gamma,N,M,err_inf,order,time_sec,scheme"

    def _lines(self, full: bool) -> list[str]:
        lines = [self.CSV_HEADER]
        for r in self.rows:
            if r.failure is not None:
                err, order = "nan", ""
            else:
                err = repr(r.err_inf) if full else f"{r.err_inf:.4e}"
                if r.order is None:
                    order = ""
                else:
                    order = repr(r.order) if full else f"{r.order:.4f}"
            lines.append(
                f"{r.alpha:g},{r.gamma:g},{r.N},{r.M},{err},{order},{r.time_sec:.4f},{r.scheme}"
            )
        return lines

    def to_csv(self, full: bool = False) -> str:
        return "\n".join(self._lines(full)) + "\n"

    def write(self, out: Path) -> tuple[Path, Path]:
        out = Path(out)
        out.parent.mkdir(parents=True, exist_ok=True)
        full = out.with_name(out.stem + "_full.csv")
        out.write_text(self.to_csv(full=False))
        full.write_text(self.to_csv(full=True))
        return out, full


def run_convergence_study(config: StudyConfig) -> ConvergenceTable:
    """Solve every ladder entry with the requested scheme(s).

    A failing run is recorded on its row (err_inf = nan) and the study
    continues.  Rows are ordered scheme-major, ladder-minor; the order
    column is empty on the first ladder row of each scheme block.
    """
    model, exact_U = manufactured(config.example, config.alpha, config.lam)
    resolutions = [
        coupled_resolution(entry, config.alpha, config.gamma, config.mode)
        for entry in config.ladder
    ]
    rows: list[ConvergenceRow] = []
    solutions: dict[tuple[str, int], Solution] = {}
    kernels: dict[int, object] = {}
    for scheme in config.schemes:
        prev_err: float | None = None
        for idx, (N, M) in enumerate(resolutions):
            try:
                mesh = build_graded_mesh(model.T, M, config.gamma)
                grid = build_spatial_grid(model.x_l, model.x_r, N)
                problem = to_ttfdr(model, mesh)
                kernel = None
                if scheme == "fs":
                    if M not in kernels:
                        kernels[M] = build_soe_kernel(
                            config.alpha, config.eps, mesh.first_step, model.T
                        )
                    kernel = kernels[M]
                sol = solve(
                    problem,
                    mesh,
                    grid,
                    scheme=scheme,
                    eps=config.eps,
                    kernel=kernel,
                    stability_monitor=config.stability_monitor,
                )
                err = error_inf(sol, exact_U, model)
            except Exception as exc:  # noqa: BLE001 - study must continue
                rows.append(
                    ConvergenceRow(
                        config.alpha, config.gamma, N, M, math.nan, None, 0.0, scheme,
                        failure=f"{type(exc).__name__}: {exc}",
                    )
                )
                prev_err = None
                continue
            order = None if (idx == 0 or prev_err is None) else math.log2(prev_err / err)
            rows.append(
                ConvergenceRow(
                    config.alpha, config.gamma, N, M, err, order, sol.elapsed, scheme
                )
            )
            solutions[(scheme, config.ladder[idx])] = sol
            prev_err = err
    table = ConvergenceTable(rows=tuple(rows), solutions=solutions)
    if config.out is not None:
        table.write(config.out)
    return table


@dataclass(frozen=True)
class PricingConfig:
    """A pricing run: one example solved over a grid of (alpha, lambda).

    Resolution follows the reference setup: N spatial intervals with
    M = ceil(N^{4/min(gamma*alpha, 2-alpha)}) time steps, gamma chosen
    per alpha as in the convergence studies.  The computed M values are
    recorded in the emitted metadata since they are derived, not given.
    """

    example: int
    alphas: tuple[float, ...] = (0.3, 0.5, 0.8)
    lams: tuple[float, ...] = (1.0, 4.0)
    N: int = 32
    scheme: str = "fs"
    eps: float = 1e-12
    out: Path | None = None
    strike_aligned: bool = False
    stability_monitor: bool = False


@dataclass(frozen=True)
class PricingCase:
    alpha: float
    lam: float
    gamma: float
    M: int
    surface_csv: str
    curve_csv: str
    surface: object
    solution: Solution


@dataclass(frozen=True)
class PricingResult:
    example: int
    cases: tuple[PricingCase, ...]
    files: tuple[Path, ...] = ()


def _case_tag(example: int, alpha: float, lam: float) -> str:
    return f"ex{example}_a{alpha:g}_l{lam:g}".replace(".", "p")


def _surface_csv(surface) -> str:
    lines = ["S,t,price"]
    S, t, C = surface.S, surface.t, surface.C
    for i in range(S.size):
        for n in range(t.size):
            lines.append(f"{float(S[i])!r},{float(t[n])!r},{float(C[n, i])!r}")
    return "\n".join(lines) + "\n"


def _curve_csv(surface) -> str:
    # the t = 0 (tau = T) price curve, the one the reference figures plot
    lines = ["S,price"]
    for i in range(surface.S.size):
        lines.append(f"{float(surface.S[i])!r},{float(surface.C[-1, i])!r}")
    return "\n".join(lines) + "\n"


def run_pricing(config: PricingConfig) -> PricingResult:
    """Price the configured example over the (alpha, lambda) grid.

    Emits one full (S, t, price) surface CSV and one t = 0 curve CSV per
    case, plus a metadata file recording the derived (gamma, M) per case.
    """
    cases: list[PricingCase] = []
    files: list[Path] = []
    outdir = Path(config.out) if config.out is not None else None
    if outdir is not None:
        outdir.mkdir(parents=True, exist_ok=True)
    meta = ["example,alpha,lambda,gamma,N,M,scheme,time_sec"]
    for alpha in config.alphas:
        for lam in config.lams:
            gamma = recommended_gamma(alpha)
            _, M = coupled_resolution(config.N, alpha, gamma, "spatial")
            model = pricing_model(config.example, alpha, lam)
            if config.strike_aligned:
                model, grid = strike_aligned(model, config.N)
            else:
                grid = build_spatial_grid(model.x_l, model.x_r, config.N)
            mesh = build_graded_mesh(model.T, M, gamma)
            problem = to_ttfdr(model, mesh)
            sol = solve(
                problem,
                mesh,
                grid,
                scheme=config.scheme,
                eps=config.eps,
                stability_monitor=config.stability_monitor,
            )
            surface = from_ttfdr(sol, model)
            tag = _case_tag(config.example, alpha, lam)
            surface_name = f"price_{tag}.csv"
            curve_name = f"curve_{tag}_t0.csv"
            if outdir is not None:
                p1 = outdir / surface_name
                p2 = outdir / curve_name
                p1.write_text(_surface_csv(surface))
                p2.write_text(_curve_csv(surface))
                files.extend([p1, p2])
            meta.append(
                f"{config.example},{alpha:g},{lam:g},{gamma:g},{config.N},{M},"
                f"{config.scheme},{sol.elapsed:.4f}"
            )
            cases.append(
                PricingCase(alpha, lam, gamma, M, surface_name, curve_name, surface, sol)
            )
    if outdir is not None:
        mp = outdir / f"pricing_ex{config.example}_meta.csv"
        mp.write_text("\n".join(meta) + "\n")
        files.append(mp)
    return PricingResult(example=config.example, cases=tuple(cases), files=tuple(files))


@dataclass(frozen=True)
class SoeReport:
    alpha: float
    eps: float
    delta: float
    T: float
    M_exp: int
    max_error: float
    passed: bool
    message: str = ""

    def summary(self) -> str:
        verdict = "PASS" if self.passed else "FAIL"
        return (
            f"soe-check alpha={self.alpha:g} eps={self.eps:g} delta={self.delta:g} "
            f"T={self.T:g}: M_exp={self.M_exp} max_error={self.max_error:.3e} {verdict}"
            + (f" ({self.message})" if self.message else "")
        )


def soe_check(
    alpha: float, eps: float, delta: float, T: float, out: Path | None = None
) -> SoeReport:
    """Build a kernel, verify its bound, and optionally dump diagnostics.

    Writes (j, s_j, w_j) modes and a sampled |error|(tau) profile when
    ``out`` is given.  A failed bound still produces the dump (the modes
    are what one inspects to see why) and is reported, not raised.
    """
    try:
        kernel = build_soe_kernel(alpha, eps, delta, T, enforce=False)
    except (SoeConstructionError, ValueError) as exc:
        return SoeReport(alpha, eps, delta, T, 0, math.inf, False, str(exc))
    passed = kernel.max_error <= eps
    if out is not None:
        out = Path(out)
        out.mkdir(parents=True, exist_ok=True)
        modes = ["j,s_j,w_j"]
        for j, (s, w) in enumerate(zip(kernel.s, kernel.w), start=1):
            modes.append(f"{j},{float(s)!r},{float(w)!r}")
        (out / "soe_modes.csv").write_text("\n".join(modes) + "\n")
        taus, errs = kernel_error_profile(kernel)
        prof = ["tau,abs_error"]
        for t, e in zip(taus, errs):
            prof.append(f"{float(t)!r},{float(e)!r}")
        (out / "soe_error_profile.csv").write_text("\n".join(prof) + "\n")
    msg = "" if passed else f"max error {kernel.max_error:.3e} > eps {eps:.1e}"
    return SoeReport(alpha, eps, delta, T, kernel.M_exp, kernel.max_error, passed, msg)
