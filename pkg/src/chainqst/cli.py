"""Command-line front end.

Every subcommand writes CSV data, ``summary.json`` (results plus a column
legend) and ``manifest.json`` (config snapshot, seed, flags and sha256 of each
artifact). Exit codes: 0 success, 1 invalid input, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import calibration as cal
from . import experiments as ex
from . import tomography as tomo
from .config import (
    Config,
    config_from_dict,
    default_config_dict,
    dump_json,
    load_config,
    schedule_from_dict,
    schedule_to_dict,
)
from .coupling import CouplingTarget, feasibility_report, synthesize_schedule
from .dynamics import noise_from_chain
from .errors import ChainQSTError, InfeasibleTargetError, NumericalError, ValidationError

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_NUMERICAL = 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


class Run:
    """Output directory bookkeeping for one subcommand invocation."""

    def __init__(self, args, cfg: Config):
        self.args = args
        self.cfg = cfg
        self.out = Path(args.out)
        self.out.mkdir(parents=True, exist_ok=True)
        self.artifacts = []

    def csv(self, name, header, rows):
        path = self.out / name
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for r in rows:
                w.writerow([_fmt(v) for v in r])
        self.artifacts.append(name)

    def json(self, name, obj):
        dump_json(obj, self.out / name)
        self.artifacts.append(name)

    def finish(self, summary: dict, columns: dict):
        self.json("summary.json", {"subcommand": self.args.command, "results": summary, "columns": columns})
        sums = {}
        for name in sorted(set(self.artifacts)):
            sums[name] = hashlib.sha256((self.out / name).read_bytes()).hexdigest()
        flags = {k: v for k, v in sorted(vars(self.args).items()) if k not in ("func", "command", "config", "out", "seed")}
        manifest = {
            "subcommand": self.args.command,
            "config": self.cfg.raw,
            "seed": self.args.seed,
            "output_dir": str(self.args.out),
            "flags": flags,
            "artifacts": sums,
        }
        dump_json(manifest, self.out / "manifest.json")


def _schedule(args, cfg: Config):
    if getattr(args, "schedule", None):
        data = json.loads(Path(args.schedule).read_text())
        return schedule_from_dict(data.get("schedule", data), cfg.chain)
    if cfg.schedule is not None:
        return cfg.schedule
    return synthesize_schedule(cfg.chain, _target(args, cfg))


def _target(args, cfg: Config) -> CouplingTarget:
    dur = getattr(args, "duration", None)
    base = getattr(args, "base_coupling", None)
    if dur is not None or base is not None:
        return CouplingTarget(cfg.chain.n, base_coupling=base, duration=dur)
    if cfg.target is None:
        raise ValidationError("no transfer target: set target.duration or pass --duration", "target")
    return cfg.target


def _noise(args, cfg: Config):
    kind = getattr(args, "noise", "none")
    if kind == "none":
        return None
    t2 = args.t2_star if getattr(args, "t2_star", None) else (cfg.uniform_t2_star if kind == "uniform" else None)
    return noise_from_chain(cfg.chain, t2_star=t2, thermal=getattr(args, "thermal", False))


# ------------------------------------------------------------------ subcommands

def cmd_synthesize(args, run: Run):
    cfg = run.cfg
    target = _target(args, cfg)
    try:
        sched = synthesize_schedule(cfg.chain, target)
    except InfeasibleTargetError:
        for r in feasibility_report(cfg.chain, target):
            print(f"link {r['link']}: target {r['target_mhz']:.4f} MHz, max {r['max_mhz']:.4f} MHz, "
                  f"headroom {r['headroom']:.4f}", file=sys.stderr)
        raise
    summary = {"bare_transfer_population": None}
    if args.refine:
        res = ex.calibrate_schedule(cfg.chain, sched, max_iter=args.max_iter)
        summary.update(
            bare_transfer_population=res.initial_fidelity,
            refined_transfer_population=res.fidelity,
            iterations=res.iterations,
            evaluations=res.evaluations,
            converged=res.converged,
        )
        sched = res.schedule
    gp = np.array(sched.effective_couplings)
    rows = []
    for j, (m, c, t) in enumerate(zip(sched.modulations, gp, target.magnitudes), start=1):
        rows.append([j, m.amplitude, m.frequency, m.phase, m.alpha, abs(c), float(np.angle(c)), t])
    run.csv("schedule.csv", ["link", "epsilon_mhz", "nu_mhz", "phi_rad", "alpha", "g_eff_mhz", "g_eff_arg_rad", "target_mhz"], rows)
    run.json("schedule.json", {"schedule": schedule_to_dict(sched)})
    summary.update(
        duration_ns=sched.duration,
        base_coupling_mhz=target.base_coupling,
        coupling_ratio=list(np.abs(gp) / np.abs(gp).min()),
    )
    run.finish(
        summary,
        {
            "link": "link j between qubits j-1 and j",
            "epsilon_mhz": "modulation amplitude of qubit j",
            "nu_mhz": "modulation frequency of qubit j",
            "phi_rad": "modulation phase of qubit j",
            "alpha": "modulation index epsilon/nu",
            "g_eff_mhz": "|g'_j| from the Bessel map",
            "g_eff_arg_rad": "arg g'_j",
            "target_mhz": "perfect-transfer target |g'_j|",
        },
    )


def cmd_optimize(args, run: Run):
    sched = _schedule(args, run.cfg)
    res = ex.calibrate_schedule(run.cfg.chain, sched, max_iter=args.max_iter, counter_rotating=args.counter_rotating)
    run.csv("trace.csv", ["iteration", "objective"], res.trace)
    run.json("schedule.json", {"schedule": schedule_to_dict(res.schedule)})
    run.finish(
        {
            "initial_objective": res.initial_fidelity,
            "final_objective": res.fidelity,
            "iterations": res.iterations,
            "evaluations": res.evaluations,
            "converged": res.converged,
            "hit_iteration_cap": res.hit_iteration_cap,
        },
        {"iteration": "simplex iteration", "objective": "best last-qubit population at tau (lab frame)"},
    )


def cmd_evolve(args, run: Run):
    cfg = run.cfg
    sched = _schedule(args, cfg)
    t_max = args.t_max_ns if args.t_max_ns else 2 * sched.duration
    times = np.arange(0.0, t_max + 0.5 * args.dt_ns, args.dt_ns)
    state = {"e": [0.0, 1.0], "plus": [1.0, 1.0]}[args.state]
    tr = ex.qst_population_trace(cfg.chain, sched, state, times, _noise(args, cfg), args.model)
    run.csv("trajectory.csv", tr.trajectory.columns(), tr.trajectory.rows())
    run.finish(
        {
            "transfer_time_ns": tr.transfer_time,
            "transfer_population": tr.transfer_population,
            "max_norm_drift": float(tr.trajectory.drift()),
            "model": args.model,
        },
        {"time_ns": "time", "p_e_qk": "excited population of qubit k", "norm_or_trace": "state norm or trace"},
    )


def cmd_chevron(args, run: Run):
    cfg = run.cfg
    j = args.link
    if not 1 <= j <= cfg.chain.n - 1:
        raise ValidationError(f"link must be in 1..{cfg.chain.n - 1}", "link")
    pair = (j - 1, j)
    det = abs(cfg.chain.detunings_mhz()[j - 1])
    eps = args.epsilon if args.epsilon is not None else args.alpha * det
    nu = np.linspace(det - args.nu_span_mhz, det + args.nu_span_mhz, args.nu_points)
    times = np.arange(0.0, args.t_max_ns + 0.5 * args.dt_ns, args.dt_ns)
    mode = ex.BOTH if args.mode == "both" else ex.SINGLE
    up = args.upstream_alpha * abs(cfg.chain.detunings_mhz()[j - 2]) if mode == ex.BOTH and j >= 2 else None
    cm = ex.chevron_scan(cfg.chain, pair, eps, nu, times, mode, up, workers=args.workers)
    rows = [[v, t, p] for v, line in zip(cm.nu, cm.p_e) for t, p in zip(cm.times, line)]
    run.csv("chevron.csv", ["nu_mhz", "time_ns", "p_e_target"], rows)
    run.csv("resonance.csv", ["time_ns", "p_e_source"], zip(cm.resonance_times, cm.resonance_p_source))
    pred = ex.expected_link_coupling(cfg.chain, pair, eps, mode, up, nu=cm.nu_star)
    run.finish(
        {
            "link": j,
            "mode": mode,
            "epsilon_mhz": eps,
            "nu_star_mhz": cm.nu_star,
            "g_eff_mhz": cm.g_eff,
            "g_eff_err_mhz": cm.g_eff_err,
            "g_eff_bessel_mhz": pred,
            "relative_deviation": cm.g_eff / pred - 1,
        },
        {
            "nu_mhz": "modulation frequency",
            "time_ns": "time",
            "p_e_target": "excited population of the initially ground qubit",
            "p_e_source": "excited population of the initially excited qubit at nu_star",
        },
    )


def cmd_phase_scan(args, run: Run):
    cfg = run.cfg
    sched = _schedule(args, cfg)
    grid = np.linspace(0.0, 2 * np.pi, args.points)
    rows, summary = [], {}
    for k in args.which or range(1, cfg.chain.n):
        ps = ex.phase_scan(cfg.chain, sched, k, grid)
        rows += [[k, p, s] for p, s in zip(ps.phis, ps.phase)]
        summary[f"slope_phi{k}"] = ps.slope
    run.csv("phase_scan.csv", ["qubit", "phi_rad", "phi_s_rad"], rows)
    run.finish(
        summary,
        {"qubit": "modulated qubit whose phase is scanned", "phi_rad": "its modulation phase", "phi_s_rad": "unwrapped transferred-state phase"},
    )


def cmd_fidelity_decay(args, run: Run):
    cfg = run.cfg
    sched = _schedule(args, cfg)
    m = list(range(1, args.m_max + 1, 4))
    noise = noise_from_chain(cfg.chain, t2_star=args.t2_star or cfg.uniform_t2_star, thermal=args.thermal)
    readout = tomo.ConfusionMatrix.from_qubit(cfg.chain.qubits[-1]) if args.shots else None
    fit = ex.repeated_transfer(cfg.chain, sched, m, noise, readout, args.shots or 1, args.seed)
    run.csv("fidelity.csv", ["m", "fidelity", "fit"], zip(fit.m, fit.fidelity, fit.model(fit.m)))
    run.finish(
        {
            "A": fit.amplitude,
            "P": fit.per_transfer,
            "A_err": fit.amplitude_err,
            "P_err": fit.per_transfer_err,
            "residual_norm": fit.residual_norm,
            "shots": args.shots,
        },
        {"m": "number of transfers", "fidelity": "process fidelity vs identity", "fit": "A P^m + 0.25"},
    )


def cmd_tomography(args, run: Run):
    cfg = run.cfg
    sched = _schedule(args, cfg)
    noise = _noise(args, cfg)
    readout = tomo.ConfusionMatrix.from_qubit(cfg.chain.qubits[-1]) if args.shots else None
    _, chis, fids = ex.transfer_processes(cfg.chain, sched, [1], noise, readout, args.shots or 1, args.seed)
    chi = chis[0]
    rows = [[i, j, chi[i, j].real, chi[i, j].imag] for i in range(4) for j in range(4)]
    run.csv("chi.csv", ["row", "col", "re", "im"], rows)
    run.finish(
        {"process_fidelity": float(fids[0]), "shots": args.shots, "noise": args.noise},
        {"row": "Pauli index (I, X, Y, Z)", "col": "Pauli index (I, X, Y, Z)", "re": "Re chi", "im": "Im chi"},
    )


def cmd_calibrate(args, run: Run):
    cfg = run.cfg
    summary = {}
    if cfg.crosstalk is not None:
        xt = cfg.crosstalk
        rows = [[i, j, xt.response[i, j], xt.correction[i, j]] for i in range(len(xt.response)) for j in range(len(xt.response))]
        run.csv("crosstalk.csv", ["row", "col", "response", "correction"], rows)
        summary["crosstalk_roundtrip_residual"] = xt.residual
    line = cfg.line_response or cal.LineResponse.parametric()
    n = args.samples
    step_at = n // 8
    target = cal.step_waveform(n, step_at)
    raw = cal.simulate_step_response(line, target, step_index=step_at, settle_ns=args.settle_ns)
    dec = cal.deconvolve(target, line, args.regularization)
    fixed = cal.simulate_step_response(line, dec.drive, target, step_index=step_at, settle_ns=args.settle_ns)
    run.csv("step.csv", ["time_ns", "target", "raw", "drive", "corrected"], zip(raw.times, target, raw.trace, dec.drive, fixed.trace))
    summary.update(
        raw_settling_deviation=raw.settling_deviation,
        corrected_settling_deviation=fixed.settling_deviation,
        regularization=dec.regularization,
        deconvolution_residual=dec.residual,
    )
    run.finish(
        summary,
        {
            "row/col": "matrix indices",
            "response": "crosstalk response M_z",
            "correction": "orthogonalization matrix",
            "time_ns": "sample time",
            "target": "desired flux step",
            "raw": "line output for the undistorted step",
            "drive": "predistorted drive",
            "corrected": "line output for the predistorted drive",
        },
    )


def cmd_self_check(args, run: Run):
    cfg = run.cfg
    cfg.chain.check_alternating()
    checks = {"qubits": cfg.chain.n, "alternating_detunings": True}
    if cfg.target is not None:
        rows = feasibility_report(cfg.chain, cfg.target)
        checks["max_headroom"] = max(r["headroom"] for r in rows)
        if checks["max_headroom"] > 1:
            raise InfeasibleTargetError(rows[0]["target_mhz"], rows[0]["max_mhz"])
        sched = synthesize_schedule(cfg.chain, cfg.target)
        sched.check_against(cfg.chain)
    if cfg.crosstalk is not None:
        checks["crosstalk_roundtrip_residual"] = cfg.crosstalk.residual
        if cfg.crosstalk.residual > 1e-12:
            raise NumericalError(f"crosstalk round trip residual {cfg.crosstalk.residual:.3g}")
    for q in cfg.chain.qubits:
        tomo.ConfusionMatrix.from_qubit(q)
    run.csv("checks.csv", ["check", "value"], sorted(checks.items()))
    run.finish(checks, {"check": "invariant name", "value": "observed value"})


# ---------------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config (default: bundled device parameters)")
    common.add_argument("--out", default="out", help="output directory")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--workers", type=int, default=os.cpu_count() or 1)

    p = _Parser(prog="chainqst", description="Parametric-modulation state transfer in qubit chains.")
    sub = p.add_subparsers(dest="command", parser_class=_Parser, required=True)

    def add(name, func, help_):
        sp = sub.add_parser(name, parents=[common], help=help_)
        sp.set_defaults(func=func)
        return sp

    def schedule_flags(sp):
        sp.add_argument("--schedule", help="schedule JSON written by 'synthesize' (default: synthesize now)")
        sp.add_argument("--duration", type=float, help="transfer time tau in ns")
        sp.add_argument("--base-coupling", type=float, help="base coupling g' in MHz")

    sp = add("synthesize", cmd_synthesize, "schedule from chain and tau")
    sp.add_argument("--duration", type=float)
    sp.add_argument("--base-coupling", type=float)
    sp.add_argument("--refine", action="store_true", help="simplex-refine against the lab-frame model")
    sp.add_argument("--max-iter", type=int, default=500)

    sp = add("optimize", cmd_optimize, "Nelder-Mead refinement of a schedule")
    schedule_flags(sp)
    sp.add_argument("--max-iter", type=int, default=500)
    sp.add_argument("--counter-rotating", action="store_true")

    sp = add("evolve", cmd_evolve, "population trace")
    schedule_flags(sp)
    sp.add_argument("--model", choices=["effective", "lab"], default="effective")
    sp.add_argument("--noise", choices=["none", "operating", "uniform"], default="none")
    sp.add_argument("--t2-star", type=float)
    sp.add_argument("--thermal", action="store_true")
    sp.add_argument("--state", choices=["e", "plus"], default="e")
    sp.add_argument("--t-max-ns", type=float)
    sp.add_argument("--dt-ns", type=float, default=1.0)

    sp = add("chevron", cmd_chevron, "chevron scan of one link")
    sp.add_argument("--link", type=int, default=1)
    sp.add_argument("--alpha", type=float, default=1.0)
    sp.add_argument("--epsilon", type=float, help="modulation amplitude in MHz (overrides --alpha)")
    sp.add_argument("--mode", choices=["single", "both"], default="single")
    sp.add_argument("--upstream-alpha", type=float, default=0.65)
    sp.add_argument("--nu-span-mhz", type=float, default=30.0)
    sp.add_argument("--nu-points", type=int, default=25)
    sp.add_argument("--t-max-ns", type=float, default=300.0)
    sp.add_argument("--dt-ns", type=float, default=1.0)

    sp = add("phase-scan", cmd_phase_scan, "transferred phase vs modulation phase")
    schedule_flags(sp)
    sp.add_argument("--which", type=int, action="append")
    sp.add_argument("--points", type=int, default=17)

    sp = add("fidelity-decay", cmd_fidelity_decay, "repeated transfer and decay fit")
    schedule_flags(sp)
    sp.add_argument("--m-max", type=int, default=105)
    sp.add_argument("--t2-star", type=float)
    sp.add_argument("--thermal", action="store_true")
    sp.add_argument("--shots", type=int, default=0, help="0 = exact tomography")

    sp = add("tomography", cmd_tomography, "process tomography of one transfer")
    schedule_flags(sp)
    sp.add_argument("--noise", choices=["none", "operating", "uniform"], default="uniform")
    sp.add_argument("--t2-star", type=float)
    sp.add_argument("--thermal", action="store_true")
    sp.add_argument("--shots", type=int, default=10_000, help="0 = exact tomography")

    sp = add("calibrate", cmd_calibrate, "crosstalk and predistortion demos")
    sp.add_argument("--samples", type=int, default=400)
    sp.add_argument("--settle-ns", type=float, default=5.0)
    sp.add_argument("--regularization", type=float)

    add("self-check", cmd_self_check, "re-validate config invariants")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config) if args.config else config_from_dict(default_config_dict())
        args.func(args, Run(args, cfg))
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ChainQSTError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
