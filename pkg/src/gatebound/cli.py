"""Command-line front end: every pipeline behind one binary.

Commands: bound-curve, gate-table, optimize, evaluate, nuc-experiment,
worst-case.  Each writes its data files (CSV by default, JSON on request),
a self-contained SVG where a figure applies, and a run manifest that
reproduces the outputs byte-for-byte when replayed.

Exit codes: 0 success, 2 usage or config error, 3 numerical failure,
4 validation violation detected.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import bath, bounds, experiments, fidelity, io, model as model_mod
from . import optimize, plots
from .errors import (
    GateboundError,
    NotUnitary,
    OutOfRange,
    ParseError,
    PreconditionViolated,
    StageOneFailed,
    ValidationError,
)

USAGE_ERROR, NUMERICAL_ERROR, VIOLATION_ERROR = 2, 3, 4


def _env(name: str, default, cast):
    raw = os.environ.get(f"GATEBOUND_{name}")
    return cast(raw) if raw is not None else default


def _float_list(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated floats: {text}") from exc


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="gatebound",
        description="Performance limits and robust pulse optimization for "
        "quantum gates under bounded uncertainty.",
    )
    p.add_argument("--seed", type=int, default=_env("SEED", 0, int))
    p.add_argument("--out-dir", default=_env("OUT_DIR", "gatebound-out", str))
    p.add_argument(
        "--threads", type=int, default=_env("THREADS", os.cpu_count() or 1, int)
    )
    p.add_argument(
        "--format",
        choices=("csv", "json"),
        default=_env("FORMAT", "csv", str),
        help="tabular output format",
    )
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("bound-curve", help="infidelity upper bound vs uncertainty")
    c.add_argument("--min", type=float, default=0.05, help="lowest T*Omega (rad)")
    c.add_argument("--max", type=float, default=1.80, help="highest T*Omega (rad)")
    c.add_argument("--points", type=int, default=176)
    c.add_argument(
        "--gate-times",
        type=_float_list,
        default=None,
        help="optional gate times in ns for a frequency-axis family",
    )

    c = sub.add_parser("gate-table", help="max uncertainty frequency per target")
    c.add_argument("--infidelities", type=_float_list, default=[1e-4, 1e-5])
    c.add_argument("--gate-times", type=_float_list, default=[25.0, 50.0, 100.0])

    c = sub.add_parser("optimize", help="robust pulse search")
    _add_model_args(c)
    c.add_argument("--two-stage", action="store_true")
    c.add_argument("--lambda", dest="lam", type=float, default=0.1)
    c.add_argument("--f0", type=float, default=0.9999)
    c.add_argument("--v-max", type=float, default=7.5)
    c.add_argument("--n-restarts", type=int, default=20)
    c.add_argument("--max-iters", type=int, default=4000)
    c.add_argument("--n-pulses", type=int, default=5)
    c.add_argument("--n-avg", type=int, default=25)
    c.add_argument("--f-tol", type=float, default=0.0)

    c = sub.add_parser("evaluate", help="Monte-Carlo bath ensemble evaluation")
    _add_model_args(c)
    c.add_argument("--pulses", required=True, help="pulses CSV from optimize")
    c.add_argument("--q-b", type=int, default=2)
    c.add_argument("--non-commuting", action="store_true")
    c.add_argument("--target-tb", type=float, default=0.3)
    c.add_argument("--norm-range", type=_float_list, default=[0.05, 2.0])
    c.add_argument("--n-samples", type=int, default=100)
    c.add_argument("--n-norm-points", type=int, default=8)
    c.add_argument("--n-avg", type=int, default=25)
    c.add_argument("--exact", action="store_true", help="also compute F_wc exactly")

    c = sub.add_parser("nuc-experiment", help="bath-unitary bound comparison")
    c.add_argument("--delta", type=float, default=0.025)
    c.add_argument("--n-mc", type=int, default=500)
    c.add_argument("--n-b", type=_float_list, default=[4, 64])

    c = sub.add_parser("worst-case", help="fidelity measures of one unitary")
    c.add_argument("unitary", help="matrix JSON file")
    c.add_argument("--n-s", type=int, default=0, help="system dim (0 = infer)")

    return p


def _add_model_args(c: argparse.ArgumentParser) -> None:
    src = c.add_mutually_exclusive_group()
    src.add_argument("--preset", default="hadamard-sigma-z-bath")
    src.add_argument("--config", default=None, help="model config JSON file")
    c.add_argument("--preset-q-b", type=int, default=2)


def _load_model(args, seed: int):
    if args.config:
        return model_mod.load_model(args.config)
    return model_mod.load_model(
        {"preset": args.preset, "q_B": args.preset_q_b, "seed": seed}
    )


def _write_table(out_dir: Path, name: str, header, rows, fmt: str) -> Path:
    if fmt == "json":
        path = out_dir / f"{name}.json"
        path.write_text(
            json.dumps(
                [dict(zip(header, [io._cell(x) for x in row])) for row in rows],
                indent=2,
            )
        )
    else:
        path = out_dir / f"{name}.csv"
        io.write_csv(path, header, rows)
    return path


def cmd_bound_curve(args, out_dir: Path) -> tuple[int, list[Path]]:
    curve = bounds.bound_curve(args.min, args.max, args.points)
    outputs = [
        _write_table(
            out_dir, "bound_curve", ["t_omega_rad", "infidelity_ub"], curve, args.format
        )
    ]
    svg = out_dir / "bound_curve.svg"
    plots.plot_bound_curve(svg, curve)
    outputs.append(svg)
    if args.gate_times:
        rows = []
        series = {}
        for t_ns in args.gate_times:
            gate_time = t_ns * 1e-9
            freq = curve[:, 0] / gate_time / (2.0 * np.pi)
            series[t_ns] = np.column_stack([freq, curve[:, 1]])
            rows.extend(
                (f, inf, t_ns) for f, inf in zip(freq, curve[:, 1])
            )
        outputs.append(
            _write_table(
                out_dir,
                "bound_curve_freq",
                ["omega_hz", "infidelity_ub", "gate_time_ns"],
                rows,
                args.format,
            )
        )
        svg = out_dir / "bound_curve_freq.svg"
        plots.plot_frequency_curves(svg, series)
        outputs.append(svg)
    return 0, outputs


def cmd_gate_table(args, out_dir: Path) -> tuple[int, list[Path]]:
    rows = []
    for eps in args.infidelities:
        for t_ns in args.gate_times:
            rows.append((eps, t_ns, bounds.invert_bound(eps, t_ns * 1e-9)))
    outputs = [
        _write_table(
            out_dir,
            "gate_table",
            ["infidelity_target", "gate_time_ns", "max_uncertainty_hz"],
            rows,
            args.format,
        )
    ]
    print(f"{'1-F <=':>10} " + " ".join(f"{t:>10g} ns" for t in args.gate_times))
    for eps in args.infidelities:
        cells = [r[2] for r in rows if r[0] == eps]
        print(f"{eps:>10g} " + " ".join(f"{c / 1e6:>10.3g} MHz"[:14] for c in cells))
    return 0, outputs


def cmd_optimize(args, out_dir: Path) -> tuple[int, list[Path]]:
    model, controls, target = _load_model(args, args.seed)
    config = optimize.OptimizerConfig(
        lam=args.lam,
        f0=args.f0,
        v_max=args.v_max,
        n_restarts=args.n_restarts,
        max_iters=args.max_iters,
        f_tol=args.f_tol,
        seed=args.seed,
        n_pulses=args.n_pulses,
        n_avg=args.n_avg,
        gate_time=controls.gate_time,
    )
    runner = optimize.optimize_two_stage if args.two_stage else optimize.optimize_single_stage
    try:
        outcome = runner(model, target, config)
    except StageOneFailed as exc:
        diag = out_dir / "optimize_result.json"
        diag.write_text(json.dumps({"error": str(exc), "f0": args.f0}, indent=2))
        print(f"error: {exc}", file=sys.stderr)
        return NUMERICAL_ERROR, [diag]
    residual = optimize.nullspace_check(outcome.controls, model, args.n_avg)
    result = {
        **outcome.summary(),
        "residual_nullspace": residual,
        "trace": outcome.trace,
        "controls": {
            "T": outcome.controls.gate_time,
            "n_pulses": outcome.controls.n_pulses,
            "v_max": outcome.controls.v_max,
            "channels": outcome.controls.channels.tolist(),
        },
        "config": {
            "lambda": config.lam,
            "f0": config.f0,
            "v_max": config.v_max,
            "n_restarts": config.n_restarts,
            "max_iters": config.max_iters,
            "n_pulses": config.n_pulses,
            "n_avg": config.n_avg,
            "seed": config.seed,
            "two_stage": args.two_stage,
        },
    }
    result_path = out_dir / "optimize_result.json"
    result_path.write_text(json.dumps(result, indent=2))
    pulses_path = out_dir / "pulses.csv"
    io.write_pulses_csv(pulses_path, outcome.controls)
    svg = out_dir / "pulses.svg"
    plots.plot_pulses(
        svg, outcome.controls.channels, outcome.controls.gate_time, config.v_max
    )
    print(
        f"1-F_nom = {1 - outcome.f_nom:.3e}  J_rbst = {outcome.j_rbst:.3e}  "
        f"residual = {residual:.3e}  restart = {outcome.restart_index}"
    )
    code = 0 if outcome.converged else NUMERICAL_ERROR
    return code, [result_path, pulses_path, svg]


def cmd_evaluate(args, out_dir: Path) -> tuple[int, list[Path]]:
    model, template, target = _load_model(args, args.seed)
    controls = io.read_pulses_csv(
        args.pulses, gate_time=template.gate_time, v_max=template.v_max
    )
    if len(args.norm_range) != 2:
        raise OutOfRange("--norm-range needs exactly two values")
    spec = bath.BathEnsembleSpec(
        q_b=args.q_b,
        commuting=not args.non_commuting,
        target_tb_norm=args.target_tb,
        th_b_norm_range=(args.norm_range[0], args.norm_range[1]),
        n_samples=args.n_samples,
        n_norm_points=args.n_norm_points,
        seed=args.seed,
        exact_worst_case=args.exact,
    )
    records = bath.evaluate_ensemble(
        model, controls, spec, n_avg=args.n_avg, threads=args.threads
    )
    summary = bath.summarize_ensemble(records)
    header = [
        "mode",
        "q_b",
        "target_tb",
        "th_b_norm",
        "t_omega_bnd_rad",
        "infidelity_bound",
        "infid_wc_low",
        "infid_wc_exact",
        "seed",
        "error",
    ]
    rows = [
        (
            r.mode,
            r.q_b,
            r.target_tb_norm,
            r.th_b_norm,
            r.t_omega_bnd,
            r.infidelity_bound,
            r.infidelity_wc_low,
            "" if r.infidelity_wc_exact is None else r.infidelity_wc_exact,
            args.seed,
            r.error or "",
        )
        for r in records
    ]
    outputs = [_write_table(out_dir, "ensemble", header, rows, args.format)]
    summary_path = out_dir / "ensemble_summary.json"
    summary_path.write_text(json.dumps(summary, indent=2))
    outputs.append(summary_path)
    lo = max(min(r.t_omega_bnd for r in records if r.error is None) * 0.8, 1e-3)
    hi = min(max(r.t_omega_bnd for r in records if r.error is None) * 1.2, 1.8776)
    svg = out_dir / "ensemble.svg"
    plots.plot_ensemble(svg, bounds.bound_curve(lo, hi, 200), records)
    outputs.append(svg)
    print(
        f"records = {summary['n_records']}  failed = {summary['n_failed']}  "
        f"bound violations = {summary['n_bound_violations']}"
    )
    code = VIOLATION_ERROR if summary["n_bound_violations"] else 0
    return code, outputs


def cmd_nuc_experiment(args, out_dir: Path) -> tuple[int, list[Path]]:
    samples = experiments.nuclear_experiment(
        delta=args.delta,
        n_mc=args.n_mc,
        n_b_list=tuple(int(x) for x in args.n_b),
        seed=args.seed,
    )
    header = [
        "n_b",
        "sample",
        "t_omega_bnd_rad",
        "infidelity_bound",
        "infidelity_avg_low",
        "infidelity_nuc",
    ]
    rows = [
        (
            s.n_b,
            s.sample_index,
            s.t_omega_bnd,
            s.infidelity_bound,
            s.infidelity_avg_low,
            s.infidelity_nuc,
        )
        for s in samples
    ]
    outputs = [_write_table(out_dir, "nuc_experiment", header, rows, args.format)]
    svg = out_dir / "nuc_experiment.svg"
    plots.plot_infidelity_distributions(svg, samples)
    outputs.append(svg)
    violations = sum(1 for s in samples if s.infidelity_nuc > s.infidelity_avg_low)
    print(f"samples = {len(samples)}  ordering violations = {violations}")
    return (VIOLATION_ERROR if violations else 0), outputs


def cmd_worst_case(args, out_dir: Path) -> tuple[int, list[Path]]:
    u = io.read_matrix_file(args.unitary)
    d = u.shape[0]
    n_s = args.n_s or (2 if d % 2 == 0 else 1)
    if d % n_s != 0:
        raise OutOfRange(f"dimension {d} is not divisible by n_S = {n_s}")
    f_nuc, _ = fidelity.nuclear_fidelity(u, n_s, d // n_s)
    report = {
        "f_wc_exact": fidelity.worst_case_exact(u),
        "f_wc_low": fidelity.worst_case_lower_bound(u),
        "f_avg_low": fidelity.average_lower_bound(u),
        "f_nuc": f_nuc,
    }
    for key, value in report.items():
        print(f"{key} = {value:.12f}")
    path = out_dir / "worst_case.json"
    path.write_text(json.dumps(report, indent=2))
    return 0, [path]


COMMANDS = {
    "bound-curve": cmd_bound_curve,
    "gate-table": cmd_gate_table,
    "optimize": cmd_optimize,
    "evaluate": cmd_evaluate,
    "nuc-experiment": cmd_nuc_experiment,
    "worst-case": cmd_worst_case,
}


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return USAGE_ERROR if exc.code else 0
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    timer = io.ManifestTimer()
    try:
        code, outputs = COMMANDS[args.command](args, out_dir)
    except (ParseError, ValidationError, OutOfRange) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    except (NotUnitary, PreconditionViolated, GateboundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return NUMERICAL_ERROR
    config = {k: v for k, v in vars(args).items() if k != "command"}
    manifest = io.RunManifest(
        command=args.command,
        argv=argv,
        config={k: (list(v) if isinstance(v, (list, tuple)) else v) for k, v in config.items()},
        seed=args.seed,
        outputs=[str(p) for p in outputs],
        duration_s=timer.elapsed(),
    )
    manifest.write(out_dir)
    return code


if __name__ == "__main__":
    sys.exit(main())
