"""Experiment runner: reproduces the study's data sets as deterministic CSV/JSON.

Usage: quenchsense <experiment> [--config FILE] [--seed N] [--out PATH]
[--threads N]. Configs are single JSON documents; unknown keys are rejected so
typos in physics parameters cannot pass silently. Exit codes: 0 success,
2 config error, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import csv
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__, analytic, dynamics, estimation, ising, metrology
from .errors import QuenchSenseError


class ConfigError(Exception):
    pass


def _grid(spec) -> np.ndarray:
    """Accept an explicit list of values or {"start", "stop", "num"}."""
    if isinstance(spec, dict):
        extra = set(spec) - {"start", "stop", "num"}
        if extra:
            raise ConfigError(f"unknown grid keys {sorted(extra)}")
        return np.linspace(spec["start"], spec["stop"], int(spec["num"]))
    return np.asarray(list(spec), dtype=float)


def _merge_strict(defaults: dict, user: dict, context: str) -> dict:
    unknown = set(user) - set(defaults)
    if unknown:
        raise ConfigError(f"unknown keys {sorted(unknown)} in {context}")
    merged = dict(defaults)
    merged.update(user)
    return merged


def _fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".17g")


def _write_csv(path: Path, header, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(x) for x in row])


def _map(fn, items, threads: int):
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(fn, items))
    return [fn(item) for item in items]


def _basis_state_11() -> np.ndarray:
    psi = np.zeros(4, dtype=complex)
    psi[3] = 1.0
    return psi


# ---------------------------------------------------------------- phase diagram

PHASE_DIAGRAM_DEFAULTS = {
    # second-order crossover scans at Bz = 0; grids start where the
    # finite-size parity splitting stays resolvable
    "second_order": {
        "6": {"start": 0.05, "stop": 1.2, "num": 24},
        "10": {"start": 0.1, "stop": 1.2, "num": 23},
    },
    # sharp first-order scans across Bz = 1 at small transverse fields
    "first_order": {
        "2": [0.1, 0.07, 0.05],
        "6": [0.1, 0.07, 0.05],
    },
    "first_order_b_z": {"start": 0.0, "stop": 2.0, "num": 401},
    "fd_delta": 1e-5,
}


def _chain_ground(n: int, b_x: float, b_z: float) -> ising.GroundState:
    return ising.ground_state_chain(ising.ChainParams(n_spins=n, b_x=b_x, b_z=b_z))


def cmd_phase_diagram(cfg: dict, out: Path, threads: int) -> None:
    delta = float(cfg["fd_delta"])
    bz_grid = _grid(cfg["first_order_b_z"])
    rows = []

    def second_order_point(args):
        n, bx = args
        gs = _chain_ground(n, bx, 0.0)
        qfi = metrology.pure_qfi_fd(lambda x: _chain_ground(n, x, 0.0).state, bx, delta)
        return (n, bx, 0.0, ising.order_parameter(gs.state, n), qfi)

    def first_order_point(args):
        n, bx, bz = args
        gs = _chain_ground(n, bx, bz)
        qfi = metrology.pure_qfi_fd(lambda x: _chain_ground(n, bx, x).state, bz, delta)
        return (n, bx, bz, ising.order_parameter(gs.state, n), qfi)

    for n_str, grid in cfg["second_order"].items():
        points = [(int(n_str), bx) for bx in _grid(grid)]
        rows.extend(_map(second_order_point, points, threads))
    for n_str, bx_list in cfg["first_order"].items():
        for bx in _grid(bx_list):
            points = [(int(n_str), float(bx), float(bz)) for bz in bz_grid]
            rows.extend(_map(first_order_point, points, threads))
    _write_csv(out, ["N", "b_x", "b_z", "order_param", "qfi_ground"], rows)


# ---------------------------------------------------------------- qfi scan

QFI_SCAN_DEFAULTS = {
    "b_x": 0.1,
    "b_z": {"start": 0.0, "stop": 2.0, "num": 201},
    "fd_delta": 0.1,
}


def _quenched_state(b_x: float, b_z: float, tau: float) -> np.ndarray:
    h = ising.build_two_spin(b_x, b_z)
    return dynamics.evolve_unitary(h, tau, _basis_state_11())


def cmd_qfi_scan(cfg: dict, out: Path, threads: int) -> None:
    bx = float(cfg["b_x"])
    delta = float(cfg["fd_delta"])
    tau = analytic.protocol_duration(bx)

    def point(bz):
        exact = analytic.quench_qfi(analytic.QuenchParams(bx, bz, tau))
        fd = metrology.pure_qfi_fd(lambda x: _quenched_state(bx, x, tau), bz, delta)
        return (bz, exact, fd)

    rows = _map(point, [float(b) for b in _grid(cfg["b_z"])], threads)
    _write_csv(out, ["b_z", "qfi_exact", "qfi_fd_delta"], rows)


# ---------------------------------------------------------------- scaling

SCALING_DEFAULTS = {
    "b_x_values": [2.22, 1.5, 1.0, 0.6, 0.35, 0.2, 0.14],
    "cfi_delta": 0.06,
    "adiabatic_c": 2.5,
    "adiabatic_p_c": 1e-4,
    "ramp_start_b_z": 2.0,
    "adiabatic_fd_delta": 1e-5,
}


def _adiabatic_qfi_for_duration(total_time: float, nominal_c: float, p_c: float,
                                start_b_z: float, fd_delta: float) -> float:
    """Information reached by a threshold-designed ramp of the given duration.

    The transverse field is chosen so the ramp speed constant matches
    nominal_c at this duration; the step time then makes the schedule take
    exactly total_time.
    """
    b_x = nominal_c / total_time
    h0 = ising.build_two_spin(b_x, start_b_z)
    path = dynamics.design_adiabatic_path(h0, ising.build_two_spin(b_x, 1.0), p_c, dt=1.0)
    path = dynamics.AdiabaticPath(schedule=path.schedule, dt=total_time / path.steps, p_c=p_c)
    psi0 = ising.ground_state(h0).state

    def state_at(bz: float) -> np.ndarray:
        final, _ = dynamics.run_adiabatic(path, h0, ising.build_two_spin(b_x, bz), psi0)
        return final

    return metrology.pure_qfi_fd(state_at, 1.0, fd_delta)


def cmd_scaling(cfg: dict, out: Path, threads: int) -> None:
    delta = float(cfg["cfi_delta"])
    povm = metrology.optimal_povm_at_critical()

    def point(bx):
        tau = analytic.protocol_duration(bx)
        probs = []
        for sign in (+1.0, -1.0):
            psi = _quenched_state(bx, 1.0 + sign * delta / 2.0, tau)
            probs.append(metrology.born_probs(np.outer(psi, psi.conj()), povm))
        cfi_val = metrology.cfi(probs[0], probs[1], delta)
        qfi_ad = _adiabatic_qfi_for_duration(
            tau, float(cfg["adiabatic_c"]), float(cfg["adiabatic_p_c"]),
            float(cfg["ramp_start_b_z"]), float(cfg["adiabatic_fd_delta"]))
        return (bx, tau, cfi_val, analytic.heisenberg_qfi(tau), qfi_ad)

    rows = _map(point, [float(b) for b in _grid(cfg["b_x_values"])], threads)
    _write_csv(out, ["b_x", "T", "cfi_optimal", "qfi_theory", "qfi_adiabatic"], rows)


# ---------------------------------------------------------------- adaptive

ADAPTIVE_DEFAULTS = {
    "b_z_true": 0.8,
    "b_x": 0.1,
    "prior_min": 0.7,
    "prior_max": 1.3,
    "shots": 110,
    "grid_points": 2001,
    "n_seeds": 100,
}


def cmd_adaptive(cfg: dict, out: Path, threads: int, seed: int = 0) -> None:
    base = {k: cfg[k] for k in ("b_z_true", "b_x", "prior_min", "prior_max",
                                "shots", "grid_points")}
    n_seeds = int(cfg["n_seeds"])

    def one(i: int) -> estimation.Trajectory:
        return estimation.run_adaptive(
            estimation.AdaptiveConfig(seed=seed + i, **base))

    trajectories = _map(one, range(n_seeds), threads)
    first = trajectories[0]
    rows = [(k + 1, first.controls[k], int(first.outcomes[k]),
             first.estimates[k], first.stds[k]) for k in range(len(first.stds))]
    _write_csv(out, ["k", "b_z_ctrl", "outcome", "estimate", "std"], rows)

    stds = np.stack([t.stds for t in trajectories])
    finals = np.array([t.estimates[-1] for t in trajectories])
    mean_curve = stds.mean(axis=0)
    bound = estimation.qcrb(int(cfg["shots"]),
                            analytic.quench_qfi(analytic.QuenchParams(
                                cfg["b_x"], 1.0, analytic.protocol_duration(cfg["b_x"]))))
    increases = int(np.sum(np.diff(mean_curve) > 0))
    summary = {
        "config": {**cfg, "seed": seed},
        "results": {
            "qcrb": bound,
            "mean_std_curve": mean_curve.tolist(),
            "mean_std_final": float(mean_curve[-1]),
            "median_std_final": float(np.median(stds[:, -1])),
            "mean_std_final_over_qcrb": float(mean_curve[-1] / bound),
            "increasing_steps": increases,
            "increasing_fraction": increases / max(len(mean_curve) - 1, 1),
            "mean_final_estimate": float(finals.mean()),
            "ensemble_estimate_std": float(finals.std()),
        },
        "version": __version__,
    }
    out.with_suffix(".json").write_text(json.dumps(summary, indent=2) + "\n",
                                        encoding="utf-8")


# ---------------------------------------------------------------- noise

NOISE_DEFAULTS = {
    "b_x": 0.1,
    "gammas": [0.0, 0.05, 0.1],
    "b_z": {"start": 0.6, "stop": 1.4, "num": 9},
    "fd_delta": 1e-3,
    "time": [1.0, 3.0, 5.0, 7.0, 9.0, 11.0, 13.0, 15.0],
    "time_gamma": 0.1,
    "cfi_delta": 0.06,
}


def _noisy_state(b_x: float, b_z: float, gamma: float, t: float) -> np.ndarray:
    rho0 = np.outer(_basis_state_11(), _basis_state_11().conj())
    model = dynamics.LindbladModel(ising.build_two_spin(b_x, b_z), gamma, gamma)
    return dynamics.evolve_lindblad(rho0, model, t)


def _noisy_qfi_pair(b_x: float, b_z: float, gamma: float, t: float, delta: float):
    hi = _noisy_state(b_x, b_z + delta / 2.0, gamma, t)
    lo = _noisy_state(b_x, b_z - delta / 2.0, gamma, t)

    def rho_at(x):  # reuse the two evolved endpoints
        return hi if x > b_z else lo

    fd = metrology.mixed_qfi_bures_fd(rho_at, b_z, delta)
    drho = 0.5 * ((hi - lo) / delta + ((hi - lo) / delta).conj().T)
    spectral = metrology.mixed_qfi_spectral(0.5 * (hi + lo), drho)
    return fd, spectral, hi, lo


def cmd_noise(cfg: dict, out: Path, threads: int) -> None:
    bx = float(cfg["b_x"])
    delta = float(cfg["fd_delta"])
    tau = analytic.protocol_duration(bx)

    def bz_point(args):
        gamma, bz = args
        fd, spectral, _, _ = _noisy_qfi_pair(bx, bz, gamma, tau, delta)
        return (bz, gamma, fd, spectral)

    points = [(float(g), float(bz))
              for g in _grid(cfg["gammas"]) for bz in _grid(cfg["b_z"])]
    rows = _map(bz_point, points, threads)
    _write_csv(out, ["b_z", "gamma", "qfi_bures_fd", "qfi_spectral"], rows)

    gamma_t = float(cfg["time_gamma"])
    cfi_delta = float(cfg["cfi_delta"])
    povm = metrology.optimal_povm_at_critical()

    def t_point(t):
        bx_t = np.pi / (2.0 * np.sqrt(2.0) * t)  # duration tau = t
        fd, spectral, hi, lo = _noisy_qfi_pair(bx_t, 1.0, gamma_t, t, delta)
        p_hi = metrology.born_probs(
            _noisy_state(bx_t, 1.0 + cfi_delta / 2.0, gamma_t, t), povm)
        p_lo = metrology.born_probs(
            _noisy_state(bx_t, 1.0 - cfi_delta / 2.0, gamma_t, t), povm)
        ghz = dynamics.ramsey_ghz_qfi(
            t, dynamics.LindbladModel(dynamics.ramsey_hamiltonian(1.0), gamma_t, gamma_t))
        return (t, spectral, metrology.cfi(p_hi, p_lo, cfi_delta), ghz)

    rows = _map(t_point, [float(t) for t in _grid(cfg["time"])], threads)
    time_path = out.with_name(out.stem + "_time" + out.suffix)
    _write_csv(time_path, ["T", "qfi_critical", "cfi_critical", "qfi_ghz"], rows)


# ---------------------------------------------------------------- critical region

CRITICAL_REGION_DEFAULTS = {
    "b_x_values": [0.05, 0.1, 0.2],
    "contrasts": [0.25, 0.5, 0.75],
}


def cmd_critical_region(cfg: dict, out: Path, threads: int) -> None:
    rows = []
    for bx in _grid(cfg["b_x_values"]):
        vmax = analytic.max_distinguishable_range(float(bx))
        for c in _grid(cfg["contrasts"]):
            region = analytic.critical_region_width(float(bx), float(c))
            rows.append((bx, c, region.zeta0, region.width_L, vmax))
    _write_csv(out, ["b_x", "C", "zeta0", "width_L", "v_max"], rows)


# ---------------------------------------------------------------- adiabatic

ADIABATIC_DEFAULTS = {
    "b_x_values": [0.1, 0.15, 0.2],
    "p_c": 1e-4,
    "time_scale": dynamics.RAMP_TIME_SCALE,
    "ramp_start_b_z": 2.0,
    "fd_delta": 1e-5,
    "nominal_c": 2.5,
}


def cmd_adiabatic(cfg: dict, out: Path, threads: int) -> None:
    p_c = float(cfg["p_c"])
    start = float(cfg["ramp_start_b_z"])
    fd_delta = float(cfg["fd_delta"])
    nominal_c = float(cfg["nominal_c"])

    def point(bx):
        dt = float(cfg["time_scale"]) / bx
        h0 = ising.build_two_spin(bx, start)
        hf = ising.build_two_spin(bx, 1.0)
        path = dynamics.design_adiabatic_path(h0, hf, p_c, dt)
        psi0 = ising.ground_state(h0).state
        final, trace = dynamics.run_adiabatic(path, h0, hf, psi0)
        qfi = metrology.pure_qfi_fd(
            lambda bz: dynamics.run_adiabatic(path, h0, ising.build_two_spin(bx, bz), psi0)[0],
            1.0, fd_delta)
        total = path.total_time
        return (bx, path.steps, total, total * bx, trace[-1], qfi,
                total ** 2 / (2.0 * nominal_c ** 2))

    rows = _map(point, [float(b) for b in _grid(cfg["b_x_values"])], threads)
    _write_csv(out, ["b_x", "steps", "total_time", "c_time", "final_fidelity",
                     "qfi_fd", "qfi_t2_over_2c2"], rows)


# ---------------------------------------------------------------- entry point

EXPERIMENTS = {
    "phase-diagram": (PHASE_DIAGRAM_DEFAULTS, cmd_phase_diagram),
    "qfi-scan": (QFI_SCAN_DEFAULTS, cmd_qfi_scan),
    "scaling": (SCALING_DEFAULTS, cmd_scaling),
    "adaptive": (ADAPTIVE_DEFAULTS, cmd_adaptive),
    "noise": (NOISE_DEFAULTS, cmd_noise),
    "critical-region": (CRITICAL_REGION_DEFAULTS, cmd_critical_region),
    "adiabatic": (ADIABATIC_DEFAULTS, cmd_adiabatic),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="quenchsense",
        description="Reproduce the critical-sensing experiments as CSV/JSON data.")
    parser.add_argument("experiment", choices=sorted(EXPERIMENTS))
    parser.add_argument("--config", type=Path, default=None,
                        help="JSON config; keys must match the experiment schema")
    parser.add_argument("--seed", type=int, default=0, help="base RNG seed")
    parser.add_argument("--out", type=Path, default=None,
                        help="output CSV path (default <experiment>.csv)")
    parser.add_argument("--threads", type=int, default=1,
                        help="worker threads for grid points")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    defaults, runner = EXPERIMENTS[args.experiment]
    try:
        user = {}
        if args.config is not None:
            user = json.loads(Path(args.config).read_text(encoding="utf-8"))
        cfg = _merge_strict(defaults, user, args.experiment)
    except (ConfigError, json.JSONDecodeError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    out = args.out if args.out is not None else Path(f"{args.experiment}.csv")
    try:
        if args.experiment == "adaptive":
            runner(cfg, out, args.threads, seed=args.seed)
        else:
            runner(cfg, out, args.threads)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except QuenchSenseError as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
