"""Command-line driver.

Exit codes: 0 success, 2 configuration error, 3 numerical failure,
4 inequality or hypothesis violation.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .config import ConfigError, RunConfig, from_dict, tomllib
from .field_space import SpectralField, divfree_modes, random_field
from .inequalities import entries_for, gn_constants_for, reports_to_csv, reports_to_jsonl, run_entry
from .ldp import (
    ControlPath,
    action_functional,
    estimate_energy_exit,
    estimate_equivalence_gap,
    estimate_gaussian_exit,
    estimate_varadhan,
    rate_function_diagonal,
    single_wavevector_noise,
    skeleton_solve,
)
from .noise import HypothesisViolation, NoiseModel, validate_hypotheses
from .rng import ENV_SEED, stream
from .simulator import (
    EnsembleSpec,
    IntegrationError,
    dump_bytes,
    energy_audit,
    ensemble_energy_audit,
    simulate_path,
    trajectory_csv,
    truncation_sensitivity,
)

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_VIOLATION = 0, 2, 3, 4
COMMANDS = ("simulate", "verify-inequalities", "energy-audit", "ldp-scan", "rate-function", "varadhan",
            "validate-noise")


# ----------------------------------------------------------------------------
# config plumbing


def _parse_value(text: str):
    try:
        return tomllib.loads(f"v = {text}")["v"]
    except tomllib.TOMLDecodeError:
        return text


def read_config(path: str | None) -> tuple[dict, bool]:
    """Raw config dict from TOML or from a run manifest, and whether it sets a seed."""
    if path is None:
        return {}, False
    raw = Path(path).read_bytes().decode("utf-8")
    if path.endswith(".json"):
        man = json.loads(raw)
        data = tomllib.loads(man["config"])
        return data, True
    try:
        data = tomllib.loads(raw)
    except tomllib.TOMLDecodeError as e:
        raise ConfigError("config", f"TOML syntax error: {e}") from None
    return data, "seed" in data


def build_config(args) -> RunConfig:
    data, has_seed = read_config(args.config)
    overrides = dict(kv.split("=", 1) for kv in args.set or [])
    for flag, key in [("n", "grid.n"), ("T", "time.T"), ("dt", "time.dt"), ("n_paths", "ensemble.n_paths"),
                      ("n_samples", "inequalities.n_samples")]:
        val = getattr(args, flag, None)
        if val is not None:
            overrides[key] = repr(val)
    for key, text in overrides.items():
        sec, _, name = key.partition(".")
        if not name:
            raise ConfigError(key, "overrides take the form section.field=value")
        data.setdefault(sec, {})[name] = _parse_value(text)
    if args.seed is not None:
        data["seed"] = args.seed
    elif not has_seed and os.environ.get(ENV_SEED):
        try:
            data["seed"] = int(os.environ[ENV_SEED])
        except ValueError:
            raise ConfigError("seed", f"{ENV_SEED} must be an integer") from None
    return from_dict(data)


def noise_from(cfg: RunConfig) -> NoiseModel:
    nz = cfg.noise
    coeffs = nz.coeffs or None
    return NoiseModel.build(cfg.grid_spec(), nz.kind, nz.K_max, nz.c_decay, nz.amplitude, nz.a, nz.b, coeffs)


def initial_from(cfg: RunConfig) -> SpectralField:
    g = cfg.grid_spec()
    if cfg.initial.kind == "zero":
        return SpectralField.zeros(g)
    return random_field(g, cfg.initial.seed, s=cfg.initial.decay, a=cfg.initial.amplitude)


def ensemble_from(cfg: RunConfig, drift: bool = True, noise: NoiseModel | None = None) -> EnsembleSpec:
    return EnsembleSpec(cfg.grid_spec(), cfg.phys_params(), initial_from(cfg).coeffs, cfg.time.T, cfg.time.dt,
                        noise or noise_from(cfg), None, cfg.seed, drift=drift)


# ----------------------------------------------------------------------------
# output


def _json(obj) -> bytes:
    return (json.dumps(obj, indent=2, sort_keys=True, default=_jsonable) + "\n").encode("utf-8")


def _jsonable(x):
    if isinstance(x, np.generic):
        return x.item()
    if isinstance(x, np.ndarray):
        return x.tolist()
    raise TypeError(type(x))


def atomic_write(path: Path, data: bytes):
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_outputs(out_dir: Path, files: dict, cfg: RunConfig, command: str, started: float, extra: dict):
    """Primary outputs first, manifest last; nothing is written before every output exists in memory."""
    for name, data in files.items():
        atomic_write(out_dir / name, data)
    manifest = {"tool": "monotone_spde", "version": __version__, "command": command, "seed": cfg.seed,
                "config": cfg.canonical(), "outputs": sorted(files), "wall_time_s": time.time() - started,
                **extra}
    atomic_write(out_dir / "config.toml", cfg.canonical().encode("utf-8"))
    atomic_write(out_dir / "manifest.json", _json(manifest))


# ----------------------------------------------------------------------------
# subcommands


def cmd_simulate(cfg: RunConfig, workers: int):
    noise = noise_from(cfg)
    u0, T, dt, prm = initial_from(cfg), cfg.time.T, cfg.time.dt, cfg.phys_params()
    traj = simulate_path(u0, T, dt, prm, noise, seed=cfg.seed)
    budget = energy_audit(traj, noise)
    files = {"trajectory.csv": trajectory_csv(traj).encode("utf-8"),
             "energy.json": _json(budget.totals()),
             "truncation.json": _json(truncation_sensitivity(u0, T, dt, prm, noise, cfg.seed, traj))}
    if "bin" in cfg.output.formats:
        files["trajectory.bin"] = dump_bytes(traj)
    return files, EXIT_OK, {}


def _entry_job(args):
    return run_entry(*args)


def cmd_verify(cfg: RunConfig, workers: int):
    grid, prm = cfg.grid_spec(), cfg.phys_params()
    entries = entries_for(prm)
    c_gn = gn_constants_for(entries, grid, cfg.seed, cfg.inequalities.gn_safety)
    jobs = [(e, grid, cfg.inequalities.n_samples, cfg.seed, 500, c_gn) for e in entries]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            parts = list(ex.map(_entry_job, jobs))
    else:
        parts = [_entry_job(j) for j in jobs]
    reports = [r for part in parts for r in part]
    main = [r for r in reports if not r.name.endswith("/canary")]
    canaries = {r.name: r.violation_fraction for r in reports if r.name.endswith("/canary")}
    summary = {"regime": prm.regime.value, "all_passed": all(r.passed for r in main),
               "failed": [r.name for r in main if not r.passed], "canary_violation_fraction": canaries,
               "c_gn": {str(k): v for k, v in c_gn.items()}}
    files = {"reports.jsonl": reports_to_jsonl(reports).encode("utf-8"),
             "reports.csv": reports_to_csv(reports).encode("utf-8"), "summary.json": _json(summary)}
    return files, EXIT_OK if summary["all_passed"] else EXIT_VIOLATION, {}


def cmd_energy(cfg: RunConfig, workers: int):
    ee = ensemble_energy_audit(ensemble_from(cfg), cfg.ensemble.n_paths, workers)
    rows = ["path,energy_T,dissipation,damping,ito,martingale,residual,bias_bound"]
    pp = ee.per_path
    for j in range(ee.n_paths):
        vals = [pp[k][j] for k in ("energy_T", "dissipation", "damping", "ito", "martingale", "residual", "bias")]
        rows.append(",".join([str(j)] + [repr(float(v)) for v in vals]))
    files = {"energy_summary.json": _json(ee.summary()), "energy_paths.csv": ("\r\n".join(rows) + "\r\n").encode()}
    return files, EXIT_OK, {}


def cmd_ldp(cfg: RunConfig, workers: int):
    ld = cfg.ldp
    spec = ensemble_from(cfg)
    gap = estimate_equivalence_gap(ld.eps_list, ld.delta, ld.n_paths, spec, workers)
    exits = estimate_energy_exit(ld.eps_list, ld.M, ld.n_paths, spec, workers)
    gspec = EnsembleSpec(spec.grid, spec.params, np.zeros_like(spec.u0), 1.0, 0.01,
                         single_wavevector_noise(spec.grid, 0.1), None, cfg.seed, drift=False)
    gauss = estimate_gaussian_exit(ld.gaussian_eps_list, ld.rho, ld.gaussian_n_paths, gspec, workers)
    files = {"gap.csv": gap.to_csv().encode(), "gaussian_exit.csv": gauss.to_csv().encode()}
    for m, est in zip(ld.M, exits):
        files[f"energy_exit_M={m:g}.csv"] = est.to_csv().encode()
    files["ldp.json"] = _json({"gap": gap.to_dict(), "energy_exit": [e.to_dict() for e in exits],
                               "gaussian_exit": gauss.to_dict(),
                               "gap_strictly_decreasing": gap.strictly_decreasing()})
    return files, EXIT_OK, {}


def load_controls(path: str, K: int) -> list:
    data = json.loads(Path(path).read_text()) if path.endswith(".json") else tomllib.loads(Path(path).read_text())
    items = data.get("control", [data]) if isinstance(data, dict) else data
    out = []
    for i, item in enumerate(items):
        try:
            h = ControlPath(item["times"], item["hdot"])
        except (KeyError, ValueError) as e:
            raise ConfigError(f"control[{i}]", str(e)) from None
        if h.K != K:
            raise ConfigError(f"control[{i}]", f"has {h.K} components, noise has {K}")
        out.append(h)
    return out


def cmd_rate(cfg: RunConfig, workers: int, control: str | None = None):
    noise = noise_from(cfg)
    if not noise.additive:
        raise ConfigError("noise.kind", "rate-function needs additive_diagonal noise")
    u0 = initial_from(cfg)
    T = cfg.time.T if cfg.time.T > 0 else 1.0
    if control:
        controls = load_controls(control, noise.K_max)
    else:
        controls = [ControlPath.random(noise.K_max, T, 5, stream(cfg.seed, 0xC0, i)) for i in range(100)]
    rows = ["index,action,rate,abs_diff"]
    worst = 0.0
    for i, h in enumerate(controls):
        path = skeleton_solve(h, u0, noise, cfg.time.dt)
        a = action_functional(h)
        r = rate_function_diagonal(path.t, path.coeffs, u0, noise)
        worst = max(worst, abs(r - a))
        rows.append(f"{i},{a!r},{r!r},{abs(r - a)!r}")
    files = {"rate_function.csv": ("\r\n".join(rows) + "\r\n").encode(), "rate_summary.json": _json(
        {"n_controls": len(controls), "max_abs_diff": worst, "ok": worst <= 1e-8})}
    return files, EXIT_OK, {}


def cmd_varadhan(cfg: RunConfig, workers: int):
    v = cfg.varadhan
    spec = ensemble_from(cfg, drift=False)
    modes, _ = divfree_modes(spec.grid, 1)
    center2 = SpectralField(spec.grid, spec.u0 + v.center_shift * modes[0])
    est = estimate_varadhan(v.t_list, center2, v.rho2, v.n_paths, spec, workers)
    noise = spec.noise
    dist = max(v.center_shift - v.rho2, 0.0)
    ref = dist**2 / float(np.max((noise.a * noise.coeffs) ** 2))
    files = {"varadhan.csv": est.to_csv().encode(),
             "varadhan.json": _json({**est.to_dict(), "gaussian_two_ball_reference": -ref})}
    return files, EXIT_OK, {}


def cmd_validate_noise(cfg: RunConfig, workers: int):
    noise = noise_from(cfg)
    prm = cfg.phys_params()
    rep = validate_hypotheses(noise, 1000, p=prm.p, r=prm.r, seed=cfg.seed, raise_on_violation=False)
    files = {"noise_report.json": _json({**rep.to_dict(), "noise": noise.describe()})}
    return files, EXIT_OK if rep.ok else EXIT_VIOLATION, {}


HANDLERS = {"simulate": cmd_simulate, "verify-inequalities": cmd_verify, "energy-audit": cmd_energy,
            "ldp-scan": cmd_ldp, "rate-function": cmd_rate, "varadhan": cmd_varadhan,
            "validate-noise": cmd_validate_noise}


def make_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="monotone-spde", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", help="TOML config or a run manifest.json")
        sp.add_argument("--seed", type=int, help=f"master seed (beats the config; {ENV_SEED} is the fallback)")
        sp.add_argument("--workers", type=int, default=os.cpu_count() or 1)
        sp.add_argument("--out", help="output directory (default: output.dir)")
        sp.add_argument("--set", action="append", metavar="SECTION.FIELD=VALUE", help="override a config field")
        sp.add_argument("--n", type=int, help="grid.n")
        sp.add_argument("--T", type=float, help="time.T")
        sp.add_argument("--dt", type=float, help="time.dt")
        sp.add_argument("--n-paths", dest="n_paths", type=int, help="ensemble.n_paths")
        sp.add_argument("--n-samples", dest="n_samples", type=int, help="inequalities.n_samples")
        if name == "rate-function":
            sp.add_argument("--control", help="TOML/JSON file with [[control]] times and hdot arrays")
    return ap


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    started = time.time()
    try:
        cfg = build_config(args)
        if args.workers < 1:
            raise ConfigError("--workers", "must be >= 1")
        handler = HANDLERS[args.command]
        if args.command == "rate-function":
            files, code, extra = handler(cfg, args.workers, args.control)
        else:
            files, code, extra = handler(cfg, args.workers)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except (IntegrationError, FloatingPointError) as e:
        print(f"numerical failure: {e}", file=sys.stderr)
        return EXIT_NUMERIC
    except HypothesisViolation as e:
        print(f"hypothesis violation: {e}", file=sys.stderr)
        return EXIT_VIOLATION
    except (OSError, ValueError) as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    out = Path(args.out or cfg.output.dir)
    write_outputs(out, files, cfg, args.command, started, extra)
    print(json.dumps({"command": args.command, "out": str(out), "exit": code, "outputs": sorted(files)}))
    return code


if __name__ == "__main__":
    sys.exit(main())
