"""Acceptance suite: one PASS/FAIL line per criterion.

Run with ``python3 -m pytest tests/test_acceptance.py -v`` or directly as a
script.  Each test prints its verdict to the terminal even when output
capture is on, then asserts it.
"""

import math
import sys
import time
from dataclasses import replace

import numpy as np
import pytest
from scipy.integrate import solve_ivp
from scipy.stats import spearmanr

from mpemba.analysis import (
    GridSpec,
    all_crossings,
    earliest_crossing,
    metric_series,
    speed_field,
    thermalization_map,
    trajectories_for,
)
from mpemba.bloch import BlochState, SystemParams, analytic_independent_cartesian, jacobian_fd, rhs
from mpemba.cli import main as cli_main
from mpemba.config import preset_fig2, preset_fig3, preset_fig4
from mpemba.lindblad import (
    build_liouvillian,
    check_density_matrix,
    evolve_exact,
    mean_magnetization,
    product_state,
    stationary_state,
)
from mpemba.metrics import (
    density_from_vector,
    distances,
    equilibrium_density,
    relative_entropy,
    relative_entropy_to_equilibrium,
    trace_distance,
)
from mpemba.ode import IntegratorConfig, integrate_batch


@pytest.fixture
def verdict(capsys):
    def report(number, ok, detail):
        with capsys.disabled():
            print(f"\ncriterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}")
        assert ok, detail

    return report


def _random_ball(rng, count):
    v = rng.normal(size=(count, 3))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    return v * rng.uniform(0, 1, size=(count, 1)) ** (1 / 3)


def test_criterion_01_closed_form_vs_rk4(verdict):
    rng = np.random.default_rng(101)
    start = time.perf_counter()
    worst = 0.0
    for t2 in (1.0, 2 / 3, 0.01):
        p = SystemParams(t1=1.0, t2=t2, n=1, m0=0.5, shared_env=False)
        initial = _random_ball(rng, 100)
        _, samples = integrate_batch(initial, p, IntegratorConfig(t_end=5.0))
        exact = analytic_independent_cartesian(initial, p, 5.0)
        worst = max(worst, float(np.max(np.abs(samples[-1] - exact))))
    elapsed = time.perf_counter() - start
    verdict(1, worst < 1e-8 and elapsed < 5, f"max endpoint error {worst:.2e} (< 1e-8), {elapsed:.2f} s (< 5 s)")


def test_criterion_02_three_way_oracle(verdict):
    rng = np.random.default_rng(202)
    start = time.perf_counter()
    times = np.linspace(0, 5, 26)
    worst = 0.0
    for t2 in (1.0, 2 / 3, 0.1):
        for shared in (True, False):
            p = SystemParams(t1=1.0, t2=t2, n=1, m0=0.5, shared_env=shared)
            for m in _random_ball(rng, 5):
                lind = mean_magnetization(evolve_exact(product_state(m, 1), build_liouvillian(p), times))
                closed = analytic_independent_cartesian(m, p, times)
                # polar equations of motion integrated by an independent solver
                s = BlochState.from_cartesian(m)
                sol = solve_ivp(
                    lambda t, y: rhs(BlochState(y[0], min(max(y[1], 0.0), math.pi)), p)[:2],
                    (0, 5), [s.r, s.theta], t_eval=times, method="DOP853", rtol=1e-12, atol=1e-13,
                )
                r, th = sol.y
                polar = np.column_stack([r * np.sin(th) * np.cos(s.phi), r * np.sin(th) * np.sin(s.phi), r * np.cos(th)])
                worst = max(worst, np.max(np.abs(lind - closed)), np.max(np.abs(polar - closed)))
    ss = mean_magnetization(stationary_state(build_liouvillian(SystemParams(1.0, 1.0, 1, 0.5))))
    ss_err = float(np.max(np.abs(ss - [0, 0, 0.5])))
    elapsed = time.perf_counter() - start
    ok = worst < 1e-7 and ss_err < 1e-10 and elapsed < 5
    verdict(2, ok, f"max disagreement {worst:.2e} (< 1e-7), stationary error {ss_err:.1e} (< 1e-10), {elapsed:.2f} s")


def test_criterion_03_jacobian_vs_closed_form_eigenvalues(verdict):
    rng = np.random.default_rng(303)
    ns = [1, 10, 1000] + list(rng.integers(1, 2001, size=17))
    bad = []
    for n in ns:
        t1 = rng.uniform(0.2, 5.0)
        p = SystemParams(t1=t1, t2=t1 * rng.uniform(0.01, 2.0), n=int(n), m0=rng.uniform(0.05, 0.95))
        eig = np.sort(np.linalg.eigvals(jacobian_fd(p)).real)
        lam1 = -1 / p.t1
        lam2 = -(1 / p.t2 + 0.5 * (p.n - 1) * p.m0 / p.t1)
        expected = np.sort([lam1, lam2, lam2])
        rel = np.max(np.abs(eig - expected) / np.abs(expected))
        if rel > 1e-4:
            bad.append((p.n, round(float(rel), 3)))
    detail = f"{20 - len(bad)}/20 parameter sets within 1e-4 relative"
    if bad:
        detail += f"; mismatched (n, rel err): {bad[:4]}{' ...' if len(bad) > 4 else ''}"
    verdict(3, not bad, detail)


def test_criterion_04_fig2_crossings(verdict):
    start = time.perf_counter()
    shared_cfg, indep_cfg = preset_fig2()
    found = {}
    for cfg in (shared_cfg, indep_cfg):
        trajs = trajectories_for(cfg.initial_states(), cfg.params, cfg.integrator)
        for metric in ("D", "S"):
            series = [metric_series(tr, metric, str(i)) for i, tr in enumerate(trajs)]
            found[cfg.params.shared_env, metric] = all_crossings(series)
    earliest = min(found[True, "D"][0].time, found[True, "S"][0].time) if found[True, "D"] and found[True, "S"] else None
    elapsed = time.perf_counter() - start
    ok = (
        bool(found[True, "D"]) and bool(found[True, "S"])
        and not found[False, "D"] and not found[False, "S"]
        and earliest is not None and 0.00399 / 10 <= earliest <= 0.00399 * 10
        and elapsed < 30
    )
    detail = (
        f"shared crossings D={len(found[True, 'D'])} S={len(found[True, 'S'])}, "
        f"independent D={len(found[False, 'D'])} S={len(found[False, 'S'])}, "
        f"earliest {earliest if earliest is None else round(earliest, 5)} vs 0.00399, {elapsed:.1f} s"
    )
    verdict(4, ok, detail)


def test_criterion_05_fig3_maps(verdict):
    start = time.perf_counter()
    map_shared, _, map_indep, _ = preset_fig3()
    grid = map_shared.grid

    indep = thermalization_map(grid, map_indep.params, map_indep.cutoff, map_indep.integrator, "D")
    rr, tt = grid.mesh()
    d0 = distances(np.stack([rr * np.sin(tt), np.zeros_like(rr), rr * np.cos(tt)], axis=-1), 0.5)[0]
    nonmono = 0
    for j in range(grid.n_theta):
        order = np.argsort(d0[:, j], kind="stable")
        if np.any(np.diff(indep.tau[order, j]) < -1e-9):
            nonmono += 1

    shared = thermalization_map(grid, map_shared.params, map_shared.cutoff, map_shared.integrator, map_shared.metric)
    target = int(np.argmin(np.abs(grid.r - map_shared.params.m0)))
    minimizers = np.nanargmin(shared.tau, axis=0)
    off = [(round(float(grid.theta[j]), 3), round(float(grid.r[i]), 3)) for j, i in enumerate(minimizers) if abs(i - target) > 1]

    p = SystemParams(1.0, 1.0, 100, 0.5, False)
    sf = speed_field(grid, p)
    to_fp = np.column_stack([-sf.r * np.sin(sf.theta), p.m0 - sf.r * np.cos(sf.theta)])
    moving = sf.speed > 1e-12
    cross = to_fp[moving, 0] * sf.velocity[moving, 1] - to_fp[moving, 1] * sf.velocity[moving, 0]
    dot = np.einsum("ij,ij->i", to_fp[moving], sf.velocity[moving])
    angle = float(np.max(np.abs(np.arctan2(cross, dot))))

    elapsed = time.perf_counter() - start
    ok = nonmono == 0 and not off and angle < 1e-10 and elapsed < 120
    detail = (
        f"independent non-monotone rays {nonmono}/{grid.n_theta}; "
        f"shared minimizer off M0 by >1 cell in {len(off)}/{grid.n_theta} columns"
        + (f" (theta0, r*) e.g. {off[:3]} ... {off[-1:]}" if off else "")
        + f"; field angle {angle:.1e}; {elapsed:.1f} s"
    )
    verdict(5, ok, detail)


def test_criterion_06_fig4_anisotropic(verdict):
    start = time.perf_counter()
    traj_cfg, map_cfg, _ = preset_fig4()
    trajs = trajectories_for(traj_cfg.initial_states(), traj_cfg.params, traj_cfg.integrator)
    counts = {
        metric: len(all_crossings([metric_series(tr, metric, str(i)) for i, tr in enumerate(trajs)]))
        for metric in ("D", "S", "Dz", "Dperp")
    }
    tm = thermalization_map(map_cfg.grid, map_cfg.params, map_cfg.cutoff, map_cfg.integrator, map_cfg.metric)
    rr, tt = map_cfg.grid.mesh()
    proxy = np.abs(rr * np.cos(tt) - map_cfg.params.m0)
    ok_cells = np.isfinite(tm.tau)
    rho = spearmanr(tm.tau[ok_cells], proxy[ok_cells]).statistic
    elapsed = time.perf_counter() - start
    ok = counts["D"] > 0 and counts["S"] > 0 and counts["Dz"] == 0 and counts["Dperp"] == 0 and rho >= 0.95 and elapsed < 120
    verdict(6, ok, f"crossings {counts}; Spearman {rho:.4f} (>= 0.95) over {ok_cells.sum()} cells; {elapsed:.1f} s")


def test_criterion_07_metric_identities(verdict):
    rng = np.random.default_rng(707)
    a, b = _random_ball(rng, 1000), _random_ball(rng, 1000)
    td_err = max(
        abs(trace_distance(density_from_vector(x), density_from_vector(y)) - 0.5 * np.linalg.norm(x - y))
        for x, y in zip(a, b)
    )
    m0 = rng.uniform(-0.9, 0.9, size=1000)
    pyth_err = 0.0
    for x, mm in zip(a, m0):
        d, dz, dp = distances(x[None, :], mm)
        pyth_err = max(pyth_err, abs(d[0] ** 2 - dz[0] ** 2 - dp[0] ** 2))

    ss = equilibrium_density(SystemParams(m0=0.5))
    s_eq = relative_entropy(ss, ss)
    s_pos = min(relative_entropy(density_from_vector(x), ss) for x in a)

    spohn_worst = -np.inf
    for k in range(50):
        t1 = rng.uniform(0.2, 5)
        p = SystemParams(t1=t1, t2=t1 * rng.uniform(0.01, 2), n=1, m0=rng.uniform(-0.9, 0.9), shared_env=False)
        times = np.linspace(0, 10 * t1, 1000)
        m = analytic_independent_cartesian(a[k], p, times)
        spohn_worst = max(spohn_worst, float(np.max(np.diff(relative_entropy_to_equilibrium(m, p.m0)))))

    ok = td_err < 1e-12 and pyth_err < 1e-12 and abs(s_eq) < 1e-12 and s_pos > 0 and spohn_worst <= 1e-12
    verdict(
        7, ok,
        f"trace-distance err {td_err:.1e}, Pythagoras err {pyth_err:.1e}, S(ss||ss)={s_eq:.1e}, "
        f"min S off-equilibrium {s_pos:.2e}, max S increment {spohn_worst:.1e}",
    )


def test_criterion_08_oracle_physicality(verdict):
    rng = np.random.default_rng(808)
    checked, failures = 0, []
    times = np.linspace(0, 5, 11)
    for n in (1, 2, 3):
        for shared in (True, False):
            for _ in range(20):
                t1 = rng.uniform(0.2, 5)
                p = SystemParams(t1=t1, t2=t1 * rng.uniform(0.01, 2), n=n, m0=rng.uniform(-0.95, 0.95), shared_env=shared)
                rho0 = product_state(_random_ball(rng, 1)[0], n)
                for rho in evolve_exact(rho0, build_liouvillian(p), times * t1):
                    try:
                        check_density_matrix(rho, tol=1e-9)
                    except ValueError as exc:
                        failures.append(f"n={n} shared={shared}: {exc}")
                checked += 1
    verdict(8, not failures, f"{checked} evolutions checked, {len(failures)} violations")


def test_criterion_09_crossing_time_scaling(verdict):
    earliest = {}
    for n in (10, 100, 1000):
        cfg = preset_fig2(n=n)[0]
        trajs = trajectories_for(cfg.initial_states(), cfg.params, cfg.integrator)
        for metric in ("D", "S"):
            t = earliest_crossing([metric_series(tr, metric, str(i)) for i, tr in enumerate(trajs)])
            earliest[metric, n] = math.inf if t is None else t
    ok = all(earliest[m, 10] >= earliest[m, 100] >= earliest[m, 1000] for m in ("D", "S"))
    shown = {f"{m}@n={n}": (round(v, 4) if math.isfinite(v) else "none") for (m, n), v in earliest.items()}
    verdict(9, ok, f"earliest crossing (no crossing counts as infinite): {shown}")


def test_criterion_10_cli_determinism(verdict, tmp_path):
    runs = []
    for k in range(2):
        out = tmp_path / f"run{k}"
        status = cli_main(["fig2", "--out", str(out)]) + cli_main(["fig4", "--grid", "8x8", "--out", str(out)])
        files = {p.relative_to(out).as_posix(): p.read_bytes() for p in sorted(out.rglob("*")) if p.is_file()}
        runs.append((status, files))
    same = runs[0][1] == runs[1][1]
    ok = runs[0][0] == 0 and runs[1][0] == 0 and same and len(runs[0][1]) > 0
    verdict(10, ok, f"{len(runs[0][1])} files, byte-identical across runs: {same}")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q"]))
