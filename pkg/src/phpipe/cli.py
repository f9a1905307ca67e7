"""Command-line front end.

Subcommands: ``simulate`` (full model trajectory), ``analytic``
(closed-form startup curves and their coefficient group), ``synth``
(synthetic observation sets), ``fit --mode lsq|constrained`` (parameter
recovery), ``report`` (artifact consistency check).

Exit codes: 0 success, 1 computational failure, 2 usage or configuration
error.  Every artifact embeds the configuration hash, and report.json in
each output directory carries the full resolved configuration plus the
SHA-256 of every sibling artifact, so `phpipe report DIR` can verify a
directory long after the run.
"""

from __future__ import annotations

import argparse
import dataclasses
import datetime
import hashlib
import json
import math
import os
import sys

import numpy as np

from . import __version__
from .analytic import film_temperature, plug_position_lncosh, plug_velocity_lncosh
from .config import RunConfig, format_float, load_config, snapshot_to_values
from .errors import ConfigError, DomainError
from .estimation import (
    CONSTRAINED_BOUNDS,
    LOOSE_BOUNDS,
    PARAM_NAMES,
    EstimationProblem,
    ForwardConfig,
    ObservationSet,
    candidate_params,
    fit_constrained,
    fit_lsq,
    generate_synthetic,
    predict_positions,
)
from .firefly import FireflyConfig
from .integrate import STATUS_COMPLETED, simulate
from .model import ASSUMED_DEFAULTS, PhysicalParams, nondim_coeffs
from .svgplot import Series, line_plot

TRAJECTORY_HEADER = "t,T_v,tau,m_v,x_p,v_p,p_v"
OBSERVATIONS_HEADER = "t,x_obs"
ANALYTIC_HEADER = "t,x_p,v_p,tau"


# ---------------------------------------------------------------------------
# serialization helpers
# ---------------------------------------------------------------------------

def _json_text(value, indent: int = 0) -> str:
    """JSON with floats at 17 significant digits and sorted keys."""
    pad = "  " * indent
    inner = "  " * (indent + 1)
    if isinstance(value, dict):
        if not value:
            return "{}"
        items = []
        for k in sorted(value, key=str):
            items.append(f'{inner}{json.dumps(str(k))}: {_json_text(value[k], indent + 1)}')
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(value, (list, tuple)):
        if not value:
            return "[]"
        items = [f"{inner}{_json_text(v, indent + 1)}" for v in value]
        return "[\n" + ",\n".join(items) + "\n" + pad + "]"
    if isinstance(value, bool):
        return "true" if value else "false"
    if value is None:
        return "null"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        v = float(value)
        if not math.isfinite(v):
            raise DomainError(f"cannot serialize non-finite float {v}")
        return format_float(v)
    if isinstance(value, str):
        return json.dumps(value)
    raise DomainError(f"cannot serialize {type(value).__name__} to JSON")


def _sha256_file(path: str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def _provenance_line(config_hash: str) -> str:
    return f"phpipe {__version__} config={config_hash}"


def _write_csv(path: str, header: str, columns, config_hash: str) -> None:
    rows = np.column_stack([np.asarray(c, dtype=float) for c in columns])
    lines = [f"# {_provenance_line(config_hash)}", header]
    for row in rows:
        lines.append(",".join(format_float(v) for v in row))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def _write_svg(path: str, svg_text: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(svg_text)


def _utc_now() -> str:
    return datetime.datetime.now(datetime.timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def _write_report(out_dir: str, command: str, config: RunConfig, results: dict,
                  artifact_names) -> str:
    artifacts = {}
    for name in sorted(artifact_names):
        artifacts[name] = _sha256_file(os.path.join(out_dir, name))
    report = {
        "command": command,
        "version": __version__,
        "timestamp": _utc_now(),
        "seed": config.get("run", "seed"),
        "config_hash": config.hash(),
        "config": config.snapshot(),
        "physical_overrides": config.physical_overrides(),
        "assumed_defaults": list(ASSUMED_DEFAULTS),
        "results": results,
        "artifacts": artifacts,
    }
    path = os.path.join(out_dir, "report.json")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(_json_text(report) + "\n")
    return path


def _read_observations(path: str) -> ObservationSet:
    if not os.path.exists(path):
        raise FileNotFoundError(path)
    times, values = [], []
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    data = [ln for ln in lines if not ln.startswith("#")]
    if not data or data[0] != OBSERVATIONS_HEADER:
        raise DomainError(
            f"observations file {path} must start with header {OBSERVATIONS_HEADER!r}")
    for ln in data[1:]:
        parts = ln.split(",")
        if len(parts) != 2:
            raise DomainError(f"malformed observations row {ln!r} in {path}")
        times.append(float(parts[0]))
        values.append(float(parts[1]))
    truth = None
    sidecar = os.path.join(os.path.dirname(os.path.abspath(path)), "truth.json")
    if os.path.exists(sidecar):
        with open(sidecar, "r", encoding="utf-8") as fh:
            payload = json.load(fh)
        truth = PhysicalParams(**payload["params"])
    return ObservationSet(times=np.array(times), x_obs=np.array(values),
                          source="file", truth=truth)


# ---------------------------------------------------------------------------
# config -> domain objects
# ---------------------------------------------------------------------------

def _forward_config(config: RunConfig) -> ForwardConfig:
    return ForwardConfig(model=config.get("estimation", "forward"),
                         t_end=config.get("estimation", "t_end"),
                         friction_coeff=config.get("estimation", "friction_coeff"),
                         p_v2=config.get("integrator", "p_v2"),
                         ode_dt=config.get("estimation", "ode_dt"))


def _firefly_config(config: RunConfig) -> FireflyConfig:
    return FireflyConfig(n=config.get("firefly", "n"),
                         iterations=config.get("firefly", "iterations"),
                         beta0=config.get("firefly", "beta0"),
                         gamma_fa=config.get("firefly", "gamma"),
                         alpha=config.get("firefly", "alpha"),
                         alpha_decay=config.get("firefly", "alpha_decay"),
                         noise=config.get("firefly", "noise"),
                         levy_lambda=config.get("firefly", "levy_lambda"),
                         seed=config.get("run", "seed"))


def _free_params(config: RunConfig) -> tuple:
    raw = config.get("estimation", "free")
    names = tuple(p.strip() for p in raw.split(",") if p.strip())
    for n in names:
        if n not in PARAM_NAMES:
            raise ConfigError(f"estimation.free contains unknown parameter {n!r}")
    if not names:
        raise ConfigError("estimation.free must name at least one parameter")
    return names


def _bounds(config: RunConfig, free, mode: str):
    base = CONSTRAINED_BOUNDS if config.get("estimation", "box") == "constrained" \
        else LOOSE_BOUNDS
    out = {n: base[n] for n in free}
    overridden = False
    for n in free:
        pair = config.get("estimation", f"bound_{n}")
        if pair is not None:
            out[n] = pair
            overridden = True
    if mode == "lsq" and config.get("estimation", "box") == "loose" and not overridden:
        return None                      # fit_lsq applies its loose box itself
    return out


def _noise_kwargs(config: RunConfig) -> dict:
    sigma = config.get("estimation", "noise_sigma")
    rel = config.get("estimation", "noise_rel")
    if sigma is not None:
        return {"noise_sigma": sigma}
    if rel is not None:
        return {"noise_rel": rel}
    return {"noise_sigma": 0.0}


def _synthesize(config: RunConfig) -> ObservationSet:
    return generate_synthetic(config.physical_params(), _forward_config(config),
                              n_points=config.get("estimation", "n_points"),
                              seed=config.get("run", "seed"),
                              **_noise_kwargs(config))


def _out_dir(config: RunConfig) -> str:
    path = config.get("output", "dir")
    os.makedirs(path, exist_ok=True)
    return path


def _params_dict(params: PhysicalParams) -> dict:
    return {f.name: getattr(params, f.name) for f in dataclasses.fields(PhysicalParams)}


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_simulate(config: RunConfig) -> int:
    params = config.physical_params()
    t_end = config.get("integrator", "t_end")
    dt = config.get("integrator", "dt")
    samples = config.get("integrator", "samples")
    store_every = config.get("integrator", "store_every")
    if store_every <= 0:
        n_steps = int(round(t_end / dt)) if t_end > 0 else 0
        store_every = max(1, n_steps // max(samples - 1, 1))
    traj = simulate(params,
                    p_v1=config.get("integrator", "p_v1"),
                    p_v2=config.get("integrator", "p_v2"),
                    t_end=t_end, dt=dt, store_every=store_every)
    out = _out_dir(config)
    chash = config.hash()
    _write_csv(os.path.join(out, "trajectory.csv"), TRAJECTORY_HEADER,
               [traj.t, traj.T_v, traj.tau, traj.m_v, traj.x_p, traj.v_p,
                traj.pressures()], chash)
    artifacts = ["trajectory.csv"]
    if config.get("output", "plot"):
        p_v2 = traj.meta["p_v2"]
        coeffs = nondim_coeffs(params, params.initial_state(), params.p_v0, p_v2,
                               c_f=config.get("estimation", "friction_coeff"))
        overlay = plug_position_lncosh(coeffs.A, coeffs.B, traj.t)
        svg = line_plot([Series("integrated x_p", traj.t, traj.x_p),
                         Series("log-cosh closed form", traj.t, overlay, dashed=True)],
                        title="Plug displacement: integrated vs closed form",
                        xlabel="t (s)", ylabel="x_p (m)",
                        comment=_provenance_line(chash))
        _write_svg(os.path.join(out, "trajectory.svg"), svg)
        artifacts.append("trajectory.svg")
    final = traj.final_state()
    results = {
        "status": traj.meta["status"],
        "stop_step": traj.meta["stop_step"],
        "stop_reason": traj.meta["stop_reason"],
        "rows": len(traj),
        "final_state": {"t": float(traj.t[-1]), "T_v": final.T_v, "tau": final.tau,
                        "m_v": final.m_v, "x_p": final.x_p, "v_p": final.v_p},
    }
    _write_report(out, "simulate", config, results, artifacts)
    status = traj.meta["status"]
    print(f"simulate: {len(traj)} rows -> {out}/trajectory.csv ({status})")
    if status != STATUS_COMPLETED:
        print(f"simulate: stopped early at step {traj.meta['stop_step']}: "
              f"{traj.meta['stop_reason']}", file=sys.stderr)
    return 0


def cmd_analytic(config: RunConfig) -> int:
    params = config.physical_params()
    p_v2 = config.get("integrator", "p_v2")
    if p_v2 is None:
        p_v2 = params.p_l
    coeffs = nondim_coeffs(params, params.initial_state(), params.p_v0, p_v2,
                           c_f=config.get("estimation", "friction_coeff"))
    t_end = config.get("estimation", "t_end")
    samples = max(config.get("integrator", "samples"), 2)
    t = np.linspace(0.0, t_end, samples)
    x = plug_position_lncosh(coeffs.A, coeffs.B, t)
    v = plug_velocity_lncosh(coeffs.A, coeffs.B, t)
    tau = film_temperature(coeffs.Q1, coeffs.Q2, t)
    out = _out_dir(config)
    chash = config.hash()
    _write_csv(os.path.join(out, "analytic.csv"), ANALYTIC_HEADER, [t, x, v, tau], chash)
    artifacts = ["analytic.csv"]
    if config.get("output", "plot"):
        svg = line_plot([Series("x_p closed form", t, x)],
                        title="Startup plug displacement (closed form)",
                        xlabel="t (s)", ylabel="x_p (m)",
                        comment=_provenance_line(chash))
        _write_svg(os.path.join(out, "analytic.svg"), svg)
        artifacts.append("analytic.svg")
    results = {"coefficients": {name: getattr(coeffs, name) for name in
                                ("a", "alpha1", "alpha2", "alpha3", "b", "eps",
                                 "Delta", "beta", "gamma", "beta1", "beta2",
                                 "A", "B", "Q1", "Q2")}}
    _write_report(out, "analytic", config, results, artifacts)
    print(f"analytic: A={format_float(coeffs.A)} B={format_float(coeffs.B)} "
          f"Q1={format_float(coeffs.Q1)} Q2={format_float(coeffs.Q2)} -> {out}/analytic.csv")
    return 0


def cmd_synth(config: RunConfig) -> int:
    obs = _synthesize(config)
    out = _out_dir(config)
    chash = config.hash()
    _write_csv(os.path.join(out, "observations.csv"), OBSERVATIONS_HEADER,
               [obs.times, obs.x_obs], chash)
    truth_payload = {
        "params": _params_dict(obs.truth),
        "noise_sigma": obs.noise_sigma,
        "n_points": len(obs),
        "seed": config.get("run", "seed"),
        "forward": {"model": config.get("estimation", "forward"),
                    "t_end": config.get("estimation", "t_end"),
                    "friction_coeff": config.get("estimation", "friction_coeff")},
        "config_hash": chash,
    }
    with open(os.path.join(out, "truth.json"), "w", encoding="utf-8") as fh:
        fh.write(_json_text(truth_payload) + "\n")
    artifacts = ["observations.csv", "truth.json"]
    if config.get("output", "plot"):
        svg = line_plot([Series("observations", obs.times, obs.x_obs, markers=True)],
                        title="Synthetic plug-position observations",
                        xlabel="t (s)", ylabel="x_obs (m)",
                        comment=_provenance_line(chash))
        _write_svg(os.path.join(out, "observations.svg"), svg)
        artifacts.append("observations.svg")
    results = {"n_points": len(obs), "noise_sigma": obs.noise_sigma,
               "t_end": config.get("estimation", "t_end")}
    _write_report(out, "synth", config, results, artifacts)
    print(f"synth: {len(obs)} observations (sigma={format_float(obs.noise_sigma)}) "
          f"-> {out}/observations.csv")
    return 0


def _true_vs_estimated(truth: PhysicalParams, free, stats) -> list:
    reference = {"L": truth.L, "d_i": truth.d_i, "T_v": truth.T_v0,
                 "T_w": truth.T_w, "p_v": truth.p_v0 / 1000.0}
    table = []
    for name in free:
        table.append({"param": name, "true": reference[name],
                      "mean": stats.mean[name], "std": stats.std[name],
                      "min": stats.min[name], "max": stats.max[name]})
    return table


def _print_fit_table(mode: str, table: list) -> None:
    if mode == "constrained":
        print(f"{'param':>6} {'true':>12} {'mean':>14} {'std':>12}")
        for row in table:
            t = "-" if row["true"] is None else f"{row['true']:.6g}"
            print(f"{row['param']:>6} {t:>12} {row['mean']:>14.8g} {row['std']:>12.6g}")
    else:
        print(f"{'param':>6} {'true':>12} {'min':>14} {'max':>14}")
        for row in table:
            t = "-" if row["true"] is None else f"{row['true']:.6g}"
            print(f"{row['param']:>6} {t:>12} {row['min']:>14.8g} {row['max']:>14.8g}")


def cmd_fit(config: RunConfig, mode: str, obs_path: str | None) -> int:
    if obs_path is not None:
        obs = _read_observations(obs_path)
    else:
        obs = _synthesize(config)
    free = _free_params(config)
    forward = _forward_config(config)
    problem = EstimationProblem(
        observations=obs, free_params=free,
        bounds=_bounds(config, free, mode),
        fixed=config.physical_params(),
        objective_mode="penalized" if mode == "constrained" else "lsq",
        forward=forward,
        sigma_scope=config.get("estimation", "sigma_scope"))
    fa = _firefly_config(config)
    seed = config.get("run", "seed")
    if mode == "constrained":
        stats, results = fit_constrained(problem, fa_config=fa,
                                         n_runs=config.get("estimation", "n_runs"),
                                         seed=seed)
    else:
        results, stats = fit_lsq(problem, n_restarts=config.get("estimation", "n_restarts"),
                                 seed=seed, fa_config=fa)

    out = _out_dir(config)
    chash = config.hash()
    run_rows = [np.arange(len(results)),
                np.array([r.seed for r in results], dtype=float),
                np.array([r.objective_value for r in results])]
    for name in free:
        run_rows.append(np.array([r.estimates[name] for r in results]))
    _write_csv(os.path.join(out, "convergence.csv"),
               "run,seed,objective," + ",".join(free), run_rows, chash)
    artifacts = ["convergence.csv"]

    truth = obs.truth
    table = _true_vs_estimated(truth, free, stats) if truth is not None else [
        {"param": n, "true": None, "mean": stats.mean[n], "std": stats.std[n],
         "min": stats.min[n], "max": stats.max[n]} for n in free]
    results_payload = {
        "mode": mode,
        "n_runs": len(results),
        "ensemble": {n: {"mean": stats.mean[n], "std": stats.std[n],
                         "min": stats.min[n], "max": stats.max[n]} for n in free},
        "runs": [{"run": i, "seed": r.seed, "objective": r.objective_value,
                  "estimates": dict(r.estimates)} for i, r in enumerate(results)],
        "true_vs_estimated": table if truth is not None else None,
        "meta": {k: v for k, v in stats.meta.items() if k != "failures"},
        "failures": stats.meta.get("failures", []),
        "observations": {"source": obs.source, "n": len(obs),
                         "noise_sigma": obs.noise_sigma},
    }

    if config.get("output", "plot"):
        mean_candidate = [stats.mean[n] for n in free]
        t_fine = np.linspace(obs.times[0], obs.times[-1], 400)
        try:
            fitted = predict_positions(
                candidate_params(problem.fixed, free, mean_candidate), t_fine, forward)
            svg = line_plot(
                [Series("observations", obs.times, obs.x_obs, markers=True),
                 Series("fit (ensemble mean)", t_fine, fitted, dashed=True)],
                title=f"Recovered startup curve ({mode})",
                xlabel="t (s)", ylabel="x_p (m)",
                comment=_provenance_line(chash))
            _write_svg(os.path.join(out, "fit.svg"), svg)
            artifacts.append("fit.svg")
        except DomainError:
            pass                        # mean candidate outside model domain
    _write_report(out, "fit", config, results_payload, artifacts)
    _print_fit_table(mode, table)
    print(f"fit: {len(results)} runs ({mode}) -> {out}/report.json")
    return 0


def cmd_report(directory: str) -> int:
    path = os.path.join(directory, "report.json")
    if not os.path.isdir(directory):
        print(f"report: no such directory: {directory}", file=sys.stderr)
        return 2
    if not os.path.exists(path):
        print(f"report: missing report.json in {directory}", file=sys.stderr)
        return 2
    with open(path, "r", encoding="utf-8") as fh:
        report = json.load(fh)
    problems = []
    try:
        cfg = snapshot_to_values(report["config"])
        if cfg.hash() != report.get("config_hash"):
            problems.append("config snapshot does not reproduce config_hash")
    except (ConfigError, KeyError, TypeError) as exc:
        problems.append(f"config snapshot invalid: {exc}")
    chash = str(report.get("config_hash"))
    for name, digest in sorted(report.get("artifacts", {}).items()):
        apath = os.path.join(directory, name)
        if not os.path.exists(apath):
            problems.append(f"missing artifact {name}")
            continue
        actual = _sha256_file(apath)
        if actual != digest:
            problems.append(f"hash mismatch for {name}: {actual} != {digest}")
        with open(apath, "r", encoding="utf-8", errors="replace") as fh:
            head = fh.read(4096)
        if chash not in head:               # comment line or JSON field
            problems.append(f"{name} does not embed the config hash")
    if problems:
        for p in problems:
            print(f"report: {p}", file=sys.stderr)
        print(f"report: {directory} is INCONSISTENT ({len(problems)} problem(s))")
        return 1
    n = len(report.get("artifacts", {}))
    print(f"report: {directory} is consistent ({n} artifact(s), "
          f"command={report.get('command')}, config={report.get('config_hash')[:12]}...)")
    return 0


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="FILE", default=None,
                        help="INI-style configuration file")
    common.add_argument("--set", metavar="SECTION.KEY=VALUE", action="append",
                        default=[], dest="overrides",
                        help="override one configuration value (repeatable)")
    common.add_argument("--out", metavar="DIR", default=None,
                        help="output directory (overrides output.dir)")
    common.add_argument("--seed", type=int, default=None,
                        help="master seed (overrides run.seed)")
    common.add_argument("--no-plot", action="store_true",
                        help="skip SVG artifacts")

    parser = argparse.ArgumentParser(
        prog="phpipe",
        description="Pulsating heat pipe startup simulation and parameter recovery.")
    parser.add_argument("--version", action="version", version=f"phpipe {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("simulate", parents=[common],
                   help="integrate the full two-phase model")
    sub.add_parser("analytic", parents=[common],
                   help="evaluate the closed-form startup curves")
    sub.add_parser("synth", parents=[common],
                   help="generate synthetic observations")
    fit = sub.add_parser("fit", parents=[common],
                         help="recover parameters from observations")
    fit.add_argument("--mode", choices=("lsq", "constrained"), required=True)
    fit.add_argument("--obs", metavar="FILE", default=None,
                     help="observations CSV (t,x_obs); default synthesizes from config")
    rep = sub.add_parser("report", help="verify an output directory")
    rep.add_argument("directory", help="directory containing report.json")
    return parser


def _resolve_config(args) -> RunConfig:
    cfg = load_config(args.config, args.overrides)
    late = {}
    if args.out is not None:
        late[("output", "dir")] = args.out
    if args.seed is not None:
        late[("run", "seed")] = args.seed
    if args.no_plot:
        late[("output", "plot")] = False
    return cfg.with_overrides(late) if late else cfg


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:           # argparse uses 2 for usage errors
        return int(exc.code or 0)
    try:
        if args.command == "report":
            return cmd_report(args.directory)
        config = _resolve_config(args)
        if args.command == "simulate":
            return cmd_simulate(config)
        if args.command == "analytic":
            return cmd_analytic(config)
        if args.command == "synth":
            return cmd_synth(config)
        if args.command == "fit":
            return cmd_fit(config, args.mode, args.obs)
        parser.error(f"unknown command {args.command}")
    except ConfigError as exc:
        print(f"phpipe: configuration error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"phpipe: file not found: {exc}", file=sys.stderr)
        return 2
    except (DomainError, RuntimeError, OSError, ValueError) as exc:
        print(f"phpipe: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
