"""Acceptance criteria.

Each test prints exactly one ``[criterion N] ...: PASS/FAIL`` line (shown
in the captured-output summary) and then asserts the same condition.
"""

import math
import time

import mpmath as mp
import numpy as np

from tfbs.benchmarks import example1
from tfbs.bs_transform import to_ttfdr
from tfbs.harness import PricingConfig, run_pricing
from tfbs.kernel_l1 import apply_tempered_l1, l1_weights
from tfbs.mesh import build_graded_mesh, build_spatial_grid
from tfbs.mittag_leffler import ml2
from tfbs.schemes import solve
from tfbs.soe import SoeConstructionError, build_soe_kernel


def _report(num: int, desc: str, ok: bool, detail: str = "") -> None:
    line = f"[criterion {num:2d}] {desc}: {'PASS' if ok else 'FAIL'}"
    if detail:
        line += f"  ({detail})"
    print(line)


def _rows(table, scheme):
    return [r for r in table.rows if r.scheme == scheme]


def _within(err, ref, rel):
    return abs(err - ref) <= rel * ref


# reference errors and orders for the convergence studies
REF_C1_ERRS = (4.0427e-3, 2.5550e-4, 1.5994e-5)
REF_C1_ORDERS = (3.9839, 3.9977)
REF_C2A_ERRS = (3.4397e-4, 1.4977e-4, 6.5200e-5)
REF_C2B_ERRS = (1.5773e-4, 5.6136e-5)
REF_C3_ERRS = (8.5897e-4, 5.5574e-5)
REF_C3_TEMPORAL = 7.4809e-5


class TestCriterion1:
    def test_spatial_table_example1(self, study_tables):
        table = study_tables["ex1_spatial"]
        ok = True
        detail = []
        for scheme in ("ds", "fs"):
            rows = _rows(table, scheme)
            errs = [r.err_inf for r in rows]
            orders = [r.order for r in rows[1:]]
            ok &= all(_within(e, ref, 0.01) for e, ref in zip(errs, REF_C1_ERRS))
            ok &= all(abs(o - ref) <= 0.05 for o, ref in zip(orders, REF_C1_ORDERS))
            detail.append(f"{scheme}: errs {errs} orders {orders}")
        _report(1, "spatial convergence table, example 1, (0.3, 4)", ok)
        assert ok, detail


class TestCriterion2:
    def test_temporal_tables_example1(self, study_tables):
        ok = True
        detail = []
        ta = study_tables["ex1_temporal_a03"]
        for scheme in ("ds", "fs"):
            rows = _rows(ta, scheme)
            errs = [r.err_inf for r in rows]
            orders = [r.order for r in rows[1:]]
            ok &= all(_within(e, ref, 0.01) for e, ref in zip(errs, REF_C2A_ERRS))
            ok &= all(abs(o - 1.2) <= 0.05 for o in orders)
            detail.append(f"(0.3,4) {scheme}: {errs} {orders}")
        tb = study_tables["ex1_temporal_a05"]
        for scheme in ("ds", "fs"):
            rows = _rows(tb, scheme)
            errs = [r.err_inf for r in rows]
            orders = [r.order for r in rows[1:]]
            ok &= all(_within(e, ref, 0.01) for e, ref in zip(errs, REF_C2B_ERRS))
            ok &= all(abs(o - 1.49) <= 0.05 for o in orders)
            detail.append(f"(0.5,3) {scheme}: {errs} {orders}")
        _report(2, "temporal convergence tables, example 1", ok)
        assert ok, detail


class TestCriterion3:
    def test_example2_tables(self, study_tables):
        ok = True
        detail = []
        ts = study_tables["ex2_spatial"]
        for scheme in ("ds", "fs"):
            rows = _rows(ts, scheme)
            errs = [r.err_inf for r in rows]
            orders = [r.order for r in rows[1:]]
            ok &= all(_within(e, ref, 0.01) for e, ref in zip(errs, REF_C3_ERRS))
            ok &= all(abs(o - 3.95) <= 0.05 for o in orders)
            detail.append(f"spatial {scheme}: {errs} {orders}")
        tt = study_tables["ex2_temporal"]
        for scheme in ("ds", "fs"):
            err = _rows(tt, scheme)[0].err_inf
            ok &= _within(err, REF_C3_TEMPORAL, 0.01)
            detail.append(f"temporal {scheme}: {err}")
        _report(3, "example 2 tables (nonhomogeneous boundaries)", ok)
        assert ok, detail


class TestCriterion4:
    def test_scheme_agreement(self, study_tables):
        worst = 0.0
        for table in study_tables.values():
            for (scheme, entry), sol in table.solutions.items():
                if scheme != "ds":
                    continue
                fs = table.solutions.get(("fs", entry))
                if fs is None:
                    continue
                worst = max(worst, float(np.max(np.abs(sol.layers - fs.layers))))
        ok = worst <= 1e-10
        _report(4, "DS/FS agreement on all table configurations", ok,
                f"max gap {worst:.2e}")
        assert ok


class TestCriterion5:
    def test_soe_kernel_bounds(self):
        # delta values from the table configurations of criteria 1-2; each
        # alpha is paired with its recommended grading index gamma
        MS = (102, 1024, 10322, 800, 1600, 3200)
        cases = [(0.3, 4.0, M) for M in MS]
        cases += [(0.5, 3.0, M) for M in (640, 1280)]
        cases += [(0.8, 2.0, M) for M in MS + (640, 1280)]
        ok = True
        detail = []
        t0 = time.perf_counter()
        for alpha, gamma, M in cases:
            delta = float(M) ** (-gamma)
            try:
                kernel = build_soe_kernel(alpha, 1e-12, delta, 1.0)
            except SoeConstructionError as exc:
                ok = False
                detail.append(f"({alpha},{gamma},M={M}): {exc}")
                continue
            case_ok = kernel.max_error <= 1e-12 and kernel.M_exp < 150
            if not case_ok:
                detail.append(
                    f"({alpha},{gamma},M={M}): M_exp={kernel.M_exp} "
                    f"err={kernel.max_error:.2e}"
                )
            ok &= case_ok
        elapsed = time.perf_counter() - t0
        _report(5, "SOE kernel error <= 1e-12 and M_exp < 150", ok,
                f"{len(cases)} kernels in {elapsed:.1f}s; " + "; ".join(detail)
                if detail else f"{len(cases)} kernels in {elapsed:.1f}s")
        assert ok, detail


class TestCriterion6:
    def test_operator_exactness_and_coefficients(self):
        ok = True
        detail = []
        # exact annihilation of v = c e^{-lam tau}
        mesh = build_graded_mesh(1.0, 48, 3.0)
        lam = 2.0
        vals = 3.7 * np.exp(-lam * mesh.levels)
        for n in (1, 17, 48):
            w = l1_weights(mesh, n, 0.4)
            out = apply_tempered_l1(vals, w, mesh, 0.4, lam, n)
            if abs(out) > 10 * np.finfo(float).eps * w.a[-1] * 3.7:
                ok = False
                detail.append(f"annihilation n={n}: {out}")
        # closed form on v = e^{-lam tau} tau
        vals = np.exp(-lam * mesh.levels) * mesh.levels
        for n in (1, 17, 48):
            tn = mesh.levels[n]
            w = l1_weights(mesh, n, 0.4)
            out = apply_tempered_l1(vals, w, mesh, 0.4, lam, n)
            exact = math.exp(-lam * tn) * tn**0.6 / math.gamma(1.6)
            if abs(out - exact) > 10 * np.finfo(float).eps * abs(exact):
                ok = False
                detail.append(f"linear n={n}: {out} vs {exact}")
        # coefficient monotonicity and lower bound, randomized sweep
        rng = np.random.default_rng(606)
        for _ in range(200):
            M = int(rng.integers(2, 2049))
            gamma = float(rng.uniform(1.0, 8.0))
            alpha = float(rng.uniform(0.05, 0.95))
            mesh = build_graded_mesh(1.0, M, gamma)
            n = int(rng.integers(1, M + 1))
            a = l1_weights(mesh, n, alpha).a
            d = np.diff(a)
            if np.any(d <= 0.0):
                # settle sub-ulp ties in high precision
                if not _strictly_increasing_mp(mesh, n, alpha):
                    ok = False
                    detail.append(f"monotonicity ({M},{gamma:.3f},{alpha:.3f},{n})")
            if a[0] < 1.0 - 1e-14:  # T = 1: lower bound T**-alpha = 1
                ok = False
                detail.append(f"lower bound ({M},{gamma:.3f},{alpha:.3f},{n})")
        _report(6, "operator exactness and coefficient inequalities", ok)
        assert ok, detail


def _strictly_increasing_mp(mesh, n, alpha):
    with mp.workdps(50):
        prev = None
        tn = mp.mpf(float(mesh.levels[n]))
        al = mp.mpf(str(alpha))
        for k in range(1, n + 1):
            tk = mp.mpf(float(mesh.levels[k]))
            tkm1 = mp.mpf(float(mesh.levels[k - 1]))
            ak = ((tn - tkm1) ** (1 - al) - (tn - tk) ** (1 - al)) / (
                (1 - al) * (tk - tkm1)
            )
            if prev is not None and ak <= prev:
                return False
            prev = ak
    return True


class TestCriterion7:
    def test_stability_inequality(self, study_tables):
        ok = True
        worst_ratio = 0.0
        for table in study_tables.values():
            for sol in table.solutions.values():
                lhs, rhs = sol.monitor
                slack = rhs * (1.0 + 1e-12) + 1e-14
                if np.any(lhs > slack):
                    ok = False
                with np.errstate(invalid="ignore", divide="ignore"):
                    ratio = np.nanmax(lhs[1:] / rhs[1:])
                worst_ratio = max(worst_ratio, float(ratio))
        _report(7, "discrete stability bound at every level", ok,
                f"max lhs/rhs {worst_ratio:.3f}")
        assert ok


class TestCriterion8:
    def test_complexity_scaling(self):
        model, _ = example1(0.3, 1.0)
        gamma = 4.0
        N = 16
        grid = build_spatial_grid(model.x_l, model.x_r, N)
        Ms = [1024, 2048, 4096, 8192]
        times = {"ds": [], "fs": []}
        for M in Ms:
            mesh = build_graded_mesh(model.T, M, gamma)
            problem = to_ttfdr(model, mesh)
            kernel = build_soe_kernel(0.3, 1e-12, mesh.first_step, model.T)
            for scheme in ("ds", "fs"):
                best = math.inf
                for _ in range(2):
                    sol = solve(problem, mesh, grid, scheme=scheme, kernel=kernel)
                    best = min(best, sol.elapsed)
                times[scheme].append(best)
        slopes = {
            s: float(np.polyfit(np.log(Ms), np.log(times[s]), 1)[0])
            for s in ("ds", "fs")
        }
        ok = (
            1.7 <= slopes["ds"] <= 2.3
            and 0.7 <= slopes["fs"] <= 1.3
            and times["fs"][-1] < times["ds"][-1]
        )
        _report(8, "DS ~ M^2 vs FS ~ M complexity, FS faster at M=8192", ok,
                f"ds slope {slopes['ds']:.2f}, fs slope {slopes['fs']:.2f}, "
                f"t(8192) ds {times['ds'][-1]:.3f}s fs {times['fs'][-1]:.3f}s")
        assert ok, (slopes, times)


class TestCriterion9:
    def test_pricing_sanity(self):
        ok = True
        detail = []
        lams = (1.0, 2.0, 4.0)
        barrier = run_pricing(PricingConfig(example=3, alphas=(0.5,), lams=lams))
        put = run_pricing(PricingConfig(example=4, alphas=(0.5,), lams=lams))

        for case in barrier.cases:
            C = case.surface.C
            if np.max(np.abs(C[:, 0])) > 0.0 or np.max(np.abs(C[:, -1])) > 0.0:
                ok = False
                detail.append(f"barrier nonzero at lam={case.lam}")
            payoff = np.maximum(case.surface.S - 10.0, 0.0)
            if np.max(np.abs(C[0, 1:-1] - payoff[1:-1])) > 1e-10:
                ok = False
                detail.append(f"barrier payoff mismatch at lam={case.lam}")

        K, r = 50.0, 0.05
        for case in put.cases:
            C = case.surface.C
            taus = case.solution.mesh.levels
            T = case.solution.mesh.T
            # the emitted t = 0 curve must be a clean put price curve
            curve = C[-1]
            if np.min(curve) < -1e-10:
                ok = False
                detail.append(f"negative put curve at lam={case.lam}")
            if np.max(np.diff(curve)) > 1e-8:
                ok = False
                detail.append(f"put curve not nonincreasing at lam={case.lam}")
            bound = K * np.exp(-r * taus)
            if np.any(C.max(axis=1) > bound * (1.0 + 1e-10) + 1e-10):
                ok = False
                detail.append(f"no-arbitrage bound violated at lam={case.lam}")
            # the non-monotone fourth-order stencil rings on the payoff
            # kink right after expiry; that transient must stay small and
            # die out well before t = 0
            neg = np.where((C < -1e-10).any(axis=1))[0]
            if neg.size and (taus[neg[-1]] > 0.1 * T or np.min(C) < -0.05):
                ok = False
                detail.append(
                    f"kink transient out of bounds at lam={case.lam}: "
                    f"min {np.min(C):.3e} until tau={taus[neg[-1]]:.3f}"
                )
            payoff = np.maximum(K - case.surface.S, 0.0)
            if np.max(np.abs(C[0, 1:-1] - payoff[1:-1])) > 1e-10:
                ok = False
                detail.append(f"put payoff mismatch at lam={case.lam}")

        # monotone response to the tempering rate at the strike
        for result, strike in ((barrier, 10.0), (put, 50.0)):
            S = result.cases[0].surface.S
            i = int(np.argmin(np.abs(S - strike)))
            at_K = [case.surface.C[-1, i] for case in result.cases]
            if not all(b < a for a, b in zip(at_K, at_K[1:])):
                ok = False
                detail.append(f"lambda response not monotone: {at_K}")

        _report(9, "pricing sanity for barrier call and European put", ok)
        assert ok, detail


class TestCriterion10:
    def test_mittag_leffler_identities(self):
        ok = True
        detail = []
        for z in np.linspace(-100.0, 100.0, 21):
            z = float(z)
            if not _close(ml2(1.0, 1.0, z), math.exp(z)):
                ok = False
                detail.append(f"E11({z})")
            expected = math.expm1(z) / z if z != 0.0 else 1.0
            if not _close(ml2(1.0, 2.0, z), expected):
                ok = False
                detail.append(f"E12({z})")
        for alpha, beta in ((0.3, 1.7), (0.5, 1.0), (0.8, 2.0), (1.0, 1.5)):
            if not _close(ml2(alpha, beta, 0.0), 1.0 / math.gamma(beta)):
                ok = False
                detail.append(f"E({alpha},{beta})(0)")
        # recurrence E_{a,b}(z) = z E_{a,a+b}(z) + 1/Gamma(b), skipping the
        # narrow band where the series needs very heavy precision (covered
        # by the slower unit tests)
        rng = np.random.default_rng(1618)
        checked = 0
        while checked < 40:
            alpha = float(rng.uniform(0.25, 1.0))
            beta = float(rng.uniform(0.5, 2.5))
            z = float(rng.uniform(-60.0, 3.0))
            digits = 0.434 * abs(z) ** (1.0 / alpha) if z != 0.0 else 0.0
            if 120.0 < digits <= 350.0:
                continue
            lhs = ml2(alpha, beta, z)
            rhs = z * ml2(alpha, alpha + beta, z) + 1.0 / math.gamma(beta)
            if not _close(lhs, rhs):
                ok = False
                detail.append(f"recurrence ({alpha:.3f},{beta:.3f},{z:.3f})")
            checked += 1
        _report(10, "Mittag-Leffler identities and recurrence", ok)
        assert ok, detail


def _close(a, b, rel=1e-11, tiny=1e-13):
    return abs(a - b) <= rel * max(abs(a), abs(b)) + tiny
