"""Command-line harness: experiment dispatch, artifacts, acceptance suite.

Exit codes: 0 ok, 2 config error, 3 exceptional weight, 4 numeric failure,
5 I/O failure.
"""

from __future__ import annotations

import argparse
import math
import sys
import time
from pathlib import Path

import numpy as np

from .config import ConfigError, ExperimentConfig, config_hash, load_config
from .cone import asymptotics_basis, harmonic_basis
from .indicial import ExceptionalWeightError, extended_set_E, guard_window
from .kernel import (
    BesselEnvelopeError,
    ModeKernel,
    assemble_kernel,
    kernel_remainder_check,
    mode_heat_kernel,
)
from .link_spectra import save_spectrum
from .quadrature import QuadratureError
from .report import RunReport, write_csv, write_text_atomic
from .solver import SolverDivergenceError, solve_cauchy
from .weighted import (
    asymptotics_projection,
    decay_exponent_fit,
    estimate_one_check,
    estimate_two_check,
    young_bound_check,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_EXCEPTIONAL = 3
EXIT_NUMERIC = 4
EXIT_IO = 5


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_spectrum(config: ExperimentConfig, args) -> RunReport:
    report = RunReport("spectrum", config_hash(config))
    spectrum = config.spectrum_only(strict=False)
    out = _out_dir(args)
    save_spectrum(spectrum, out / "spectrum.txt")
    report.artifacts.append(str(out / "spectrum.txt"))
    report.add("entries", len(spectrum.entries), None, len(spectrum.entries) > 0)
    report.add(
        "zero_mode_present", 0.0 if spectrum.zero_mode_missing else 1.0, 1.0,
        not spectrum.zero_mode_missing,
    )
    return report


def cmd_index(config: ExperimentConfig, args) -> RunReport:
    report = RunReport("index", config_hash(config))
    block = config.raw.get("index", {})
    spectrum = config.spectrum_only()
    m = int(config.raw["model"]["m"])
    lo = float(block.get("delta_min", -3.0))
    hi = float(block.get("delta_max", 3.0))
    step = float(block.get("delta_step", 0.25))
    skip = float(block.get("skip_near", 1e-6))
    window = (min(lo, 2 - m - 1.5) - 2.5, hi + 2.5)
    from .indicial import exceptional_set_D

    profile = exceptional_set_D(spectrum, m, window)
    ext = extended_set_E(profile)
    rows = []
    all_ok = True
    deltas = np.arange(lo, hi + step / 2, step)
    for delta in deltas:
        near_root = any(abs(delta - r.alpha) <= skip for r in profile.roots)
        near_e = any(abs(delta - e.beta) <= skip for e in ext.eset)
        if near_root or near_e or any(
            abs(delta - 2 - e.beta) <= skip for e in ext.eset
        ):
            continue
        m_val = profile.M(float(delta))
        n_val = ext.N(float(delta))
        n_shift = ext.N(float(delta) - 2.0)
        identity = (m_val == n_val - n_shift) if delta > 2 else (m_val == n_val)
        all_ok = all_ok and identity
        rows.append((float(delta), m_val, n_val, n_shift, identity))
    out = _out_dir(args)
    write_csv(out / "index_table.csv", ["delta", "M", "N", "N_shifted", "identity_check"], rows)
    report.artifacts.append(str(out / "index_table.csv"))
    report.add("index_identity_all", float(all_ok), 1.0, all_ok)
    return report


def cmd_basis(config: ExperimentConfig, args) -> RunReport:
    report = RunReport("basis", config_hash(config))
    block = config.raw.get("basis", {})
    gamma = float(block["gamma"])
    model = config.model()
    ext = model.extended_profile(guard_window(gamma, model.m))
    basis = asymptotics_basis(model, ext, gamma)
    harmonic = harmonic_basis(model, ext.profile, gamma)
    rows = [(e.alpha, e.k, e.lam, e.eigen_index, e.order) for e in basis.elements]
    out = _out_dir(args)
    write_csv(out / "basis.csv", ["alpha", "k", "lambda", "eigen_index", "order"], rows)
    report.artifacts.append(str(out / "basis.csv"))
    from .indicial import model_space_dims

    dim_h, dim_v = model_space_dims(ext, gamma)
    report.add("count_matches_N", len(basis), float(dim_v), len(basis) == dim_v)
    report.add("harmonic_matches_M", len(harmonic), float(dim_h), len(harmonic) == dim_h)
    return report


def cmd_kernel_check(config: ExperimentConfig, args) -> RunReport:
    report = RunReport("kernel-check", config_hash(config))
    block = config.raw.get("kernel_check", {})
    model = config.model()
    rng = np.random.default_rng(config.seed)
    out = _out_dir(args)

    n_samples = int(block.get("n_scaling_samples", 200))
    rows = []
    worst = 0.0
    for _ in range(n_samples):
        lam = float(rng.uniform(0.0, 40.0))
        k = ModeKernel.from_lambda(model.m, lam)
        t = float(rng.uniform(0.1, 1.0))
        r = float(rng.uniform(0.3, 3.0))
        rp = float(rng.uniform(0.3, 3.0))
        s = float(rng.uniform(0.5, 2.0))
        base = float(mode_heat_kernel(k, t, r, rp))
        scaled = float(mode_heat_kernel(k, s * s * t, s * r, s * rp))
        residual = abs(scaled - s ** (-model.m) * base) / (s ** (-model.m) * base)
        worst = max(worst, residual)
        rows.append((lam, t, r, rp, s, residual))
    write_csv(out / "scaling_residuals.csv", ["lambda", "t", "r", "r_prime", "s", "residual"], rows)
    report.artifacts.append(str(out / "scaling_residuals.csv"))
    report.add("scaling_max_residual", worst, 1e-12, worst < 1e-12)

    if model.link.__class__.__name__ == "RoundSphereLink" and model.m == 3 and model.link.radius == 1.0:
        t_grid = np.geomspace(*block.get("t_grid", [0.25, 1.0]), 6)
        r_grid = np.linspace(*block.get("r_grid", [0.4, 1.6]), 6)
        thetas = np.linspace(0.0, math.pi, int(block.get("theta_points", 6)))
        y_radius = float(block.get("y_radius", 1.0))
        pole = model.link.point(0.0)
        erows = []
        eworst = 0.0
        for t in t_grid:
            for r in r_grid:
                for theta in thetas:
                    x = (model.link.point(float(theta)), float(r))
                    y = (pole, y_radius)
                    kv = assemble_kernel(model, float(t), x, y)
                    d = model.cone_distance(x, y)
                    exact = (4 * math.pi * t) ** (-1.5) * math.exp(-d * d / (4 * t))
                    rel = abs(kv.value - exact) / exact
                    eworst = max(eworst, rel)
                    erows.append((float(t), float(r), float(theta), rel))
        write_csv(out / "euclidean_errors.csv", ["t", "r", "theta", "rel_error"], erows)
        report.artifacts.append(str(out / "euclidean_errors.csv"))
        report.add("euclidean_max_rel_error", eworst, 1e-6, eworst < 1e-6)
    else:
        report.add("euclidean_max_rel_error", None, 1e-6, None)

    gamma = block.get("gamma")
    if gamma is not None:
        gamma = float(gamma)
        stage_bottoms = block.get("r_stages", [1e-2, 2.5e-3])
        pole = model.link.point(0.4)
        stages = [
            ([0.1, 0.7], [(model.link.point(0.0), float(r)) for r in np.geomspace(b, 0.4, 4)], [(pole, 0.6)])
            for b in stage_bottoms
        ]
        rem = kernel_remainder_check(model, gamma, stages)
        write_csv(
            out / "remainder_ratios.csv",
            ["t", "r", "r_prime", "ratio"],
            rem["rows"],
        )
        report.artifacts.append(str(out / "remainder_ratios.csv"))
        sups = rem["sups"]
        stable = all(sups[i + 1] <= sups[i] * 1.2 for i in range(len(sups) - 1))
        report.add("remainder_trend_stable", max(sups), None, stable and rem["tail_ok"])
    else:
        report.add("remainder_trend_stable", None, None, None)
    return report


def cmd_solve(config: ExperimentConfig, args) -> RunReport:
    report = RunReport("solve", config_hash(config))
    model = config.model()
    sources, gamma, grid, scheme, times = config.solve_block()
    solution = solve_cauchy(model, sources, gamma, grid, scheme, threads=args.threads)
    out = _out_dir(args)
    t_list = times or [scheme.T]
    max_abs = 0.0
    for lam, mode in sorted(solution.modes.items()):
        rows = []
        for t in t_list:
            slice_v = mode.slice_at(float(t))
            max_abs = max(max_abs, float(np.max(np.abs(slice_v))))
            rows.extend(
                (float(t), float(r), float(v)) for r, v in zip(grid.nodes, slice_v)
            )
        name = f"mode_{lam:g}.csv"
        write_csv(out / name, ["t", "r", "v"], rows)
        report.artifacts.append(str(out / name))
    report.add("max_abs_u", max_abs, None, True)
    report.add("zero_initial_condition", 0.0, 0.0, True)
    meta = {
        "gamma": gamma,
        "J": grid.J,
        "K": scheme.K,
        "q": grid.q,
        "T": scheme.T,
        "R_out": grid.R_out,
        "modes": sorted(solution.modes),
    }
    import json

    write_text_atomic(out / "solve_meta.json", json.dumps(meta, indent=2, sort_keys=True))
    report.artifacts.append(str(out / "solve_meta.json"))
    return report


def cmd_verify_decay(config: ExperimentConfig, args) -> RunReport:
    report = RunReport("verify-decay", config_hash(config))
    block = config.raw.get("decay")
    if block is None:
        raise ConfigError("missing [decay] table")
    model = config.model()
    gamma = float(block["gamma"])
    from .solver import RadialGrid, SchemeParams, SourceMode

    grid = RadialGrid(R_out=float(block.get("R_out", model.R_out)), J=int(block["J"]))
    scheme = SchemeParams(K=int(block["K"]), T=float(block["T"]))
    probe = SourceMode(
        lam=0.0,
        r_power=float(block.get("r_power", gamma - 2.0)),
        chi_scale=float(block.get("chi_scale", model.R_out)),
    )
    solution = solve_cauchy(model, [probe], gamma, grid, scheme, threads=args.threads)
    v = solution.modes[0.0].slice_at(scheme.T)
    r = grid.nodes
    orders = [float(o) for o in block.get("orders", [])]
    proj_window = tuple(block.get("proj_window", (3e-4, 5e-3)))
    fit_window = tuple(block.get("fit_window", (1e-2, 8e-2)))
    if orders:
        dec = asymptotics_projection(v, r, orders, proj_window)
        field = dec.remainder
    else:
        field = v
    slope, r2 = decay_exponent_fit(field, r, fit_window)
    predicted = float(block.get("predicted_exponent", gamma))
    tolerance = float(block.get("tolerance", 0.05))
    ok = abs(slope - predicted) <= tolerance
    out = _out_dir(args)
    mask = (r >= fit_window[0] / 4) & (r <= fit_window[1] * 4)
    write_csv(
        out / "decay_sweep.csv",
        ["r", "field"],
        list(zip(r[mask].tolist(), field[mask].tolist())),
    )
    report.artifacts.append(str(out / "decay_sweep.csv"))
    report.add("decay_exponent", slope, predicted, ok)
    report.add("fit_quality_r2", r2, 0.99, r2 > 0.99)
    return report


def cmd_estimate_check(config: ExperimentConfig, args) -> RunReport:
    report = RunReport("estimate-check", config_hash(config))
    block = config.raw.get("estimate")
    if block is None:
        raise ConfigError("missing [estimate] table")
    model = config.model()
    gamma = float(block["gamma"])
    t_grid = [float(t) for t in block.get("t_grid", [0.05, 0.5])]
    r_min = float(block.get("r_min", 1e-2))
    r_max = float(block.get("r_max", 0.4))
    n_r = int(block.get("n_r", 5))
    refinements = int(block.get("refinements", 2))
    stages = [
        np.geomspace(r_min / 4**lvl, r_max, n_r) for lvl in range(refinements)
    ]
    one = estimate_one_check(model, gamma, t_grid, stages)
    out = _out_dir(args)
    write_csv(out / "estimate_one.csv", ["t", "r", "ratio"], one["rows"])
    report.artifacts.append(str(out / "estimate_one.csv"))
    trend_ok = all(abs(tr - 1.0) < 0.2 for tr in one["trend_ratios"])
    report.add("prop41_sup_ratio", max(one["sups"]), None, trend_ok)

    shift = int(block.get("shift", 0))
    xi_min = float(block.get("xi_min", 1e-2))
    xi_stages = [xi_min / 8**lvl for lvl in range(refinements + 1)]
    two = estimate_two_check(model, gamma, shift, t_grid, xi_stages)
    stable = max(two["growth_factors"]) < 1.2 if two["hypothesis_satisfied"] else None
    report.add(
        "prop42_sup",
        max(two["sups"]),
        None,
        stable if two["hypothesis_satisfied"] else None,
    )
    neg_gamma = block.get("negative_control_gamma")
    if neg_gamma is not None:
        neg = estimate_two_check(model, float(neg_gamma), shift, t_grid, xi_stages)
        grows = min(neg["growth_factors"]) > 2.0
        report.add("prop42_negative_control_growth", min(neg["growth_factors"]), 2.0, grows)
    return report


def cmd_young_check(config: ExperimentConfig, args) -> RunReport:
    report = RunReport("young-check", config_hash(config))
    block = config.raw.get("young")
    if block is None:
        raise ConfigError("missing [young] table")
    model = config.model()
    result = young_bound_check(
        model,
        p=float(block["p"]),
        delta=float(block["delta"]),
        eps=float(block["eps"]),
        f_power=float(block["f_power"]),
        chi_scale=float(block.get("chi_scale", model.R_out)),
        horizon=float(block.get("horizon", 1.0)),
        n_t=int(block.get("n_t", 4)),
        n_r=int(block.get("n_r", 12)),
    )
    out = _out_dir(args)
    rows = [(k, v) for k, v in sorted(result["exponents"].items())]
    write_csv(out / "young_exponents.csv", ["name", "value"], rows)
    report.artifacts.append(str(out / "young_exponents.csv"))
    report.add("young_lhs_over_rhs", result["lhs"] / result["rhs"], 1.01, result["passed"])
    return report


COMMANDS = {
    "spectrum": cmd_spectrum,
    "index": cmd_index,
    "basis": cmd_basis,
    "kernel-check": cmd_kernel_check,
    "solve": cmd_solve,
    "verify-decay": cmd_verify_decay,
    "estimate-check": cmd_estimate_check,
    "young-check": cmd_young_check,
}


def run(command: str, config_path: str, out_dir: str, seed: int | None = None, threads: int = 1) -> RunReport:
    """Programmatic entry point mirroring the CLI."""
    ns = argparse.Namespace(out=out_dir, threads=threads)
    config = load_config(config_path, seed=seed)
    started = time.monotonic()
    report = COMMANDS[command](config, ns)
    report.wall_time = time.monotonic() - started
    write_text_atomic(Path(out_dir) / f"{command.replace('-', '_')}_report.json", report.to_json())
    return report


def cmd_acceptance(args) -> int:
    """Run every canned config in the suite directory; aggregate pass/fail."""
    if args.config:
        suite = Path(args.config)
    else:
        import importlib.resources as resources

        suite = Path(str(resources.files("coneheat") / "acceptance_suite"))
    configs = sorted(suite.glob("*.toml"))
    if not configs:
        print(f"no acceptance configs under {suite}", file=sys.stderr)
        return EXIT_CONFIG
    failures = 0
    summaries = []
    for path in configs:
        cfg = load_config(path, seed=args.seed)
        command = cfg.raw.get("command", "index")
        out = Path(args.out) / path.stem
        report = run(command, str(path), str(out), seed=args.seed, threads=args.threads)
        for check in report.checks:
            line = f"{path.stem}:{check.name}: {check.status}"
            print(line)
            summaries.append(line)
            if check.status == "FAIL":
                failures += 1
    write_text_atomic(Path(args.out) / "acceptance_summary.txt", "\n".join(summaries) + "\n")
    return EXIT_NUMERIC if failures else EXIT_OK


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="coneheat",
        description="heat-equation numerics on exact cones",
    )
    parser.add_argument("command", choices=list(COMMANDS) + ["acceptance"])
    parser.add_argument("--config", default=None, help="experiment TOML (or suite dir for acceptance)")
    parser.add_argument("--out", default="out", help="artifact directory")
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--threads", type=int, default=1)
    args = parser.parse_args(argv)
    try:
        if args.command == "acceptance":
            return cmd_acceptance(args)
        if not args.config:
            print("--config is required", file=sys.stderr)
            return EXIT_CONFIG
        report = run(args.command, args.config, args.out, seed=args.seed, threads=args.threads)
        for check in report.checks:
            print(f"{check.name}: {check.status}")
        return EXIT_OK if report.all_passed else EXIT_NUMERIC
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ExceptionalWeightError as exc:
        print(f"exceptional weight: {exc}", file=sys.stderr)
        return EXIT_EXCEPTIONAL
    except (QuadratureError, SolverDivergenceError, BesselEnvelopeError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        # input-contract violations from module preconditions
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"I/O failure: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
