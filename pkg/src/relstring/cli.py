"""Command-line front end: presets, runs, sweeps, bit-exact exports.

Every subcommand validates its configuration (unknown keys rejected), writes
data files only (diagnostics go to stderr), and finishes with a manifest.json
recording the config hash, tool version, wall time, output hashes, and
per-check results.  Exit codes: 0 success, 2 validation failure, 3 numerical
consistency failure, 4 I/O error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import __version__
from . import bounds as bounds_mod
from . import curved as curved_mod
from . import r3 as r3_mod
from . import serialize as ser
from . import singularity as sing
from .curves import random_initial_data, validate_initial_data
from .errors import (CharacteristicCrossingError, GeneratorError,
                     InternalConsistencyError, InvalidEventError,
                     PreconditionError, RelstringError, StepSizeError,
                     StructuralError, UnclassifiedDegenerateError)
from .evolution import evolve_point, gamma_s, time_slice, worldsheet_export
from .gauge import gauge_residuals, reparametrize_surface
from .presets import get_preset, presets

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3
EXIT_IO = 4

_SCHEMAS = {
    "presets": set(),
    "validate": {"preset", "data", "tol"},
    "evolve": {"preset", "data", "tmax", "tmin", "grid"},
    "slices": {"preset", "data", "times", "grid"},
    "detect": {"preset", "data", "grid", "seed", "modes", "amplitude"},
    "classify": {"preset", "data", "t0", "s0"},
    "local-model": {"preset", "data", "t0", "s0"},
    "gauge-fix": {"patch_csv"},
    "bound": {"preset", "data", "s_range", "grid"},
    "curved": {"data", "tmax", "grid", "cfl", "threshold"},
    "r3": {"preset", "tmax_periods", "grid"},
    "sweep": {"seeds", "modes", "amplitude", "jobs"},
}


class SchemaError(StructuralError):
    pass


def _log(msg):
    print(msg, file=sys.stderr)


def _config_from(args):
    cfg = {}
    if getattr(args, "config", None):
        with open(args.config) as fh:
            loaded = json.load(fh)
        kind = loaded.pop("kind", None)
        if kind is not None and kind != args.command:
            raise SchemaError(f"config kind {kind!r} does not match command {args.command!r}")
        cfg.update(loaded)
    for key in _SCHEMAS[args.command]:
        flag = key.replace("-", "_")
        if getattr(args, flag, None) is not None:
            cfg[key] = getattr(args, flag)
    unknown = set(cfg) - _SCHEMAS[args.command]
    if unknown:
        raise SchemaError(f"unknown config keys for {args.command}: {sorted(unknown)}")
    return cfg


def _initial_data(cfg, default_preset=None):
    if "data" in cfg and cfg["data"] is not None:
        obj = ser.object_from_dict(cfg["data"])
    elif cfg.get("preset"):
        obj = get_preset(cfg["preset"])
    elif "seed" in cfg and cfg["seed"] is not None:
        obj = random_initial_data(int(cfg["seed"]), modes=int(cfg.get("modes", 3)),
                                  amplitude=float(cfg.get("amplitude", 0.5)))
    elif default_preset:
        obj = get_preset(default_preset)
    else:
        raise SchemaError("no input data: pass --preset or --config")
    return obj


def _sha256(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        h.update(fh.read())
    return h.hexdigest()


def _finish(outdir, command, cfg, outputs, checks, started):
    manifest = {
        "command": command,
        "config_hash": hashlib.sha256(ser.dumps(cfg).encode()).hexdigest(),
        "version": __version__,
        "wall_time_s": time.monotonic() - started,
        "outputs": [{"path": os.path.relpath(p, outdir), "sha256": _sha256(p)}
                    for p in sorted(outputs)],
        "checks": checks,
    }
    ser.write_json(os.path.join(outdir, "manifest.json"), manifest)
    for name, ok in checks.items():
        _log(f"[{command}] check {name}: {'pass' if ok else 'FAIL'}")
    return EXIT_OK if all(checks.values()) else EXIT_VALIDATION


def _ensure_out(args):
    outdir = args.out or "."
    os.makedirs(outdir, exist_ok=True)
    return outdir


# -- subcommand implementations ------------------------------------------------


def cmd_presets(args):
    started = time.monotonic()
    outdir = _ensure_out(args)
    cfg = _config_from(args)
    doc = [{"name": p.name, "kind": p.kind, "singular": p.singular,
            "valid": p.valid, "note": p.note} for p in presets()]
    path = os.path.join(outdir, "presets.json")
    ser.write_json(path, doc)
    return _finish(outdir, "presets", cfg, [path], {"listed": True}, started)


def cmd_validate(args):
    started = time.monotonic()
    outdir = _ensure_out(args)
    cfg = _config_from(args)
    data = _initial_data(cfg)
    report = validate_initial_data(data, tol=float(cfg.get("tol", 1e-9)))
    path = os.path.join(outdir, "validation.json")
    ser.write_json(path, report.as_dict())
    return _finish(outdir, "validate", cfg, [path], {"passed": report.passed}, started)


def cmd_evolve(args):
    started = time.monotonic()
    outdir = _ensure_out(args)
    cfg = _config_from(args)
    data = _initial_data(cfg)
    nt, ns = _parse_grid(cfg.get("grid", "64x256"))
    t0, t1 = float(cfg.get("tmin", 0.0)), float(cfg.get("tmax", data.period / 2))
    table = worldsheet_export(data, (t0, t1), nt, ns)
    path = os.path.join(outdir, "worldsheet.csv")
    ser.write_worldsheet_csv(path, data, table)
    return _finish(outdir, "evolve", cfg, [path], {"exported": True}, started)


def cmd_slices(args):
    started = time.monotonic()
    outdir = _ensure_out(args)
    cfg = _config_from(args)
    data = _initial_data(cfg)
    times = cfg.get("times", "0.0")
    if isinstance(times, str):
        times = [float(x) for x in times.split(",")]
    n = int(cfg.get("grid", 256))
    rows = []
    for t in times:
        sl = time_slice(data, t, n)
        for k in range(n):
            rows.append((sl.t, sl.s[k], *sl.positions[k], sl.speeds[k]))
    path = os.path.join(outdir, "slices.csv")
    header = ["t", "s", "x", "y"] + (["z"] if data.dim == 3 else []) + ["speed"]
    ser.write_csv(path, header, rows)
    return _finish(outdir, "slices", cfg, [path], {"exported": True}, started)


def _detect_report(data, grid=2048):
    events = sing.first_singularity_events(data, grid=grid)
    docs = []
    for ev in events:
        try:
            model = sing.local_model(data, ev)
        except (UnclassifiedDegenerateError, InvalidEventError):
            model = None
        docs.append(ser.event_to_dict(ev, model))
    return docs


def cmd_detect(args):
    started = time.monotonic()
    outdir = _ensure_out(args)
    cfg = _config_from(args)
    data = _initial_data(cfg)
    docs = _detect_report(data, grid=int(cfg.get("grid", 2048)))
    path = os.path.join(outdir, "singularities.json")
    ser.write_json(path, docs)
    return _finish(outdir, "detect", cfg, [path],
                   {"found": len(docs) > 0}, started)


def _classify_common(args, with_model):
    started = time.monotonic()
    outdir = _ensure_out(args)
    cfg = _config_from(args)
    data = _initial_data(cfg)
    if cfg.get("t0") is not None and cfg.get("s0") is not None:
        ev = sing.event_at(data, float(cfg["t0"]), float(cfg["s0"]))
    else:
        ev = sing.first_singularity(data)
    model = None
    if with_model:
        model = sing.local_model(data, ev)
    doc = ser.event_to_dict(ev, model)
    name = "local_model.json" if with_model else "classification.json"
    path = os.path.join(outdir, name)
    ser.write_json(path, doc)
    cmd = "local-model" if with_model else "classify"
    return _finish(outdir, cmd, cfg, [path], {"classified": ev.kind is not None}, started)


def cmd_classify(args):
    return _classify_common(args, with_model=False)


def cmd_local_model(args):
    return _classify_common(args, with_model=True)


def cmd_gauge_fix(args):
    started = time.monotonic()
    outdir = _ensure_out(args)
    cfg = _config_from(args)
    if not cfg.get("patch_csv"):
        raise SchemaError("gauge-fix needs patch_csv (CSV grid of t,s,x,y)")
    patch = ser.patch_from_csv(cfg["patch_csv"])
    fixed = reparametrize_surface(patch)
    res = gauge_residuals(fixed)
    csv_path = os.path.join(outdir, "gauge_fixed.csv")
    ser.patch_to_csv(csv_path, fixed)
    rep_path = os.path.join(outdir, "gauge_residuals.json")
    ser.write_json(rep_path, {
        "orthogonality": res.orthogonality,
        "normalization": res.normalization,
        "conservation_drift": res.conservation_drift,
        "new_period": fixed.period,
    })
    ok = max(res.orthogonality, res.normalization, res.conservation_drift) < 1e-5
    return _finish(outdir, "gauge-fix", cfg, [csv_path, rep_path],
                   {"gauge_recovered": ok}, started)


def cmd_bound(args):
    started = time.monotonic()
    outdir = _ensure_out(args)
    cfg = _config_from(args)
    data = _initial_data(cfg)
    s_range = cfg.get("s_range") or [0.0, data.period]
    arc = bounds_mod.OpenArc.from_initial_data(data, tuple(map(float, s_range)))
    j = bounds_mod.timelikeness_index(arc)
    load = bounds_mod.curvature_load(arc)
    cert = bounds_mod.existence_guarantee(arc)
    doc = ser.certificate_to_dict(cert, j=j, load=load)
    checks = {"computed": True}
    if cert is not None:
        report = bounds_mod.verify_guarantee(arc, cert, grid=int(cfg.get("grid", 512)))
        doc["verified_min_speed"] = report.min_speed
        doc["verified"] = report.passed
        checks["floor_respected"] = report.passed
    path = os.path.join(outdir, "certificate.json")
    ser.write_json(path, doc)
    return _finish(outdir, "bound", cfg, [path], checks, started)


def cmd_curved(args):
    started = time.monotonic()
    outdir = _ensure_out(args)
    cfg = _config_from(args)
    if "data" not in cfg or cfg["data"] is None:
        raise SchemaError("curved needs a reduced_background data document")
    data = ser.object_from_dict(cfg["data"])
    hyp = curved_mod.hypothesis_check(data)
    tau_max = float(cfg.get("tmax", 3.0))
    traj = curved_mod.evolve_u(data, tau_max, n=int(cfg.get("grid", 512)),
                               cfl=float(cfg.get("cfl", 0.5)),
                               blow_threshold=float(cfg.get("threshold", 1e8)))
    csv_path = os.path.join(outdir, "trajectory.csv")
    ser.write_trajectory_csv(csv_path, traj)
    doc = {
        "a_lb": hyp.a_lb,
        "hypothesis_holds": hyp.holds,
        "reflected": traj.reflected,
        "blow_up_bracket": list(traj.blow_up_bracket) if traj.blow_up_bracket else None,
    }
    checks = {"evolved": True}
    if hyp.holds:
        tb = curved_mod.blow_up_bound(hyp.a_lb, float(data.u0.mean()),
                                      float(data.v0.mean()))
        doc["tau_bound"] = tb
        mon = curved_mod.mean_monitor(traj)
        doc["monitor"] = {"wpp_violation": mon.wpp_violation,
                          "wprime_decreasing": mon.wprime_decreasing,
                          "energy_min_increment": mon.energy_min_increment,
                          "holds": mon.holds}
        checks["monitor"] = mon.holds
        if traj.blow_up_bracket is not None:
            out_interval = traj.taus[1] - traj.taus[0] if len(traj.states) > 1 else traj.dt
            checks["blowup_before_bound"] = bool(
                traj.blow_up_bracket[1] <= tb + out_interval)
    rep_path = os.path.join(outdir, "curved_report.json")
    ser.write_json(rep_path, doc)
    return _finish(outdir, "curved", cfg, [csv_path, rep_path], checks, started)


def cmd_r3(args):
    started = time.monotonic()
    outdir = _ensure_out(args)
    cfg = _config_from(args)
    name = cfg.get("preset", "tetra")
    curve = get_preset(name)
    if not isinstance(curve, r3_mod.SpaceCurve3):
        raise SchemaError(f"preset {name!r} is not a space curve")
    margin = r3_mod.antipodal_margin(curve, grid=int(cfg.get("grid", 512)))
    t_max = float(cfg.get("tmax_periods", 10.0)) * curve.length
    min_speed = r3_mod.min_slice_speed(curve, t_max)
    csv_path = os.path.join(outdir, "curve.csv")
    ser.write_curve3_csv(csv_path, curve)
    rep_path = os.path.join(outdir, "margin.json")
    ser.write_json(rep_path, {
        "preset": name,
        "length": curve.length,
        "antipodal_margin": margin,
        "regularity_margin": 0.5 * margin,
        "min_slice_speed": min_speed,
        "window_periods": t_max / curve.length,
    })
    agree = abs(min_speed - 0.5 * margin) < 1e-6
    return _finish(outdir, "r3", cfg, [csv_path, rep_path],
                   {"margin_identity": agree}, started)


def _sweep_one(seed_modes_amp):
    seed, modes, amplitude = seed_modes_amp
    data = random_initial_data(seed, modes=modes, amplitude=amplitude)
    docs = _detect_report(data)
    return seed, docs


def cmd_sweep(args):
    started = time.monotonic()
    outdir = _ensure_out(args)
    cfg = _config_from(args)
    n_seeds = int(cfg.get("seeds", 10))
    modes = int(cfg.get("modes", 3))
    amplitude = float(cfg.get("amplitude", 0.5))
    jobs = int(cfg.get("jobs", 1))
    tasks = [(seed, modes, amplitude) for seed in range(n_seeds)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = dict(pool.map(_sweep_one, tasks))
        results = [(seed, results[seed]) for seed in range(n_seeds)]
    else:
        results = [_sweep_one(t) for t in tasks]

    run_dir = os.path.join(outdir, "runs")
    os.makedirs(run_dir, exist_ok=True)
    outputs = []
    rows = []
    all_ok = True
    for seed, docs in results:
        path = os.path.join(run_dir, f"seed_{seed:04d}.json")
        ser.write_json(path, docs)
        outputs.append(path)
        first = docs[0]
        rows.append((seed, first["t0"], first["kind"], first.get("p"),
                     first.get("q"), first.get("k0")))
        all_ok = all_ok and first["t0"] > 0

    agg_path = os.path.join(outdir, "aggregate.csv")
    with open(agg_path, "w") as fh:
        fh.write("seed,t0,kind,p,q,k0\n")
        for seed, t0, kind, p, q, k0 in rows:
            fmt = lambda v: "" if v is None else repr(float(v))
            fh.write(f"{seed},{repr(float(t0))},{kind},{fmt(p)},{fmt(q)},{fmt(k0)}\n")
    outputs.append(agg_path)
    return _finish(outdir, "sweep", cfg, outputs,
                   {"all_detected": all_ok, "count": len(rows) == n_seeds}, started)


def _parse_grid(text):
    if isinstance(text, (list, tuple)):
        return int(text[0]), int(text[1])
    parts = str(text).lower().split("x")
    if len(parts) != 2:
        raise SchemaError(f"grid must look like 64x256, got {text!r}")
    return int(parts[0]), int(parts[1])


def build_parser():
    ap = argparse.ArgumentParser(prog="relstring",
                                 description="Closed relativistic strings: evolution, "
                                             "singularities, certificates, blow-up.")
    sub = ap.add_subparsers(dest="command", required=True)

    def add(name, fn, extra=()):
        p = sub.add_parser(name)
        p.add_argument("--config", help="JSON config file (kind-discriminated)")
        p.add_argument("--out", help="output directory (default: cwd)")
        for flag, kwargs in extra:
            p.add_argument(flag, **kwargs)
        p.set_defaults(func=fn)
        return p

    add("presets", cmd_presets)
    add("validate", cmd_validate, [("--preset", {}), ("--tol", {"type": float})])
    add("evolve", cmd_evolve, [("--preset", {}), ("--tmax", {"type": float}),
                               ("--tmin", {"type": float}), ("--grid", {})])
    add("slices", cmd_slices, [("--preset", {}), ("--times", {}),
                               ("--grid", {"type": int})])
    add("detect", cmd_detect, [("--preset", {}), ("--grid", {"type": int}),
                               ("--seed", {"type": int}), ("--modes", {"type": int}),
                               ("--amplitude", {"type": float})])
    add("classify", cmd_classify, [("--preset", {}), ("--t0", {"type": float}),
                                   ("--s0", {"type": float})])
    add("local-model", cmd_local_model, [("--preset", {}), ("--t0", {"type": float}),
                                         ("--s0", {"type": float})])
    add("gauge-fix", cmd_gauge_fix, [("--patch-csv", {"dest": "patch_csv"})])
    add("bound", cmd_bound, [("--preset", {}), ("--grid", {"type": int})])
    add("curved", cmd_curved, [("--tmax", {"type": float}), ("--grid", {"type": int}),
                               ("--cfl", {"type": float}),
                               ("--threshold", {"type": float})])
    add("r3", cmd_r3, [("--preset", {}), ("--grid", {"type": int}),
                       ("--tmax-periods", {"dest": "tmax_periods", "type": float})])
    add("sweep", cmd_sweep, [("--seeds", {"type": int}), ("--modes", {"type": int}),
                             ("--amplitude", {"type": float}),
                             ("--jobs", {"type": int})])
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (SchemaError, StructuralError, InvalidEventError, PreconditionError,
            UnclassifiedDegenerateError) as exc:
        _log(f"validation error: {exc}")
        return EXIT_VALIDATION
    except (InternalConsistencyError, StepSizeError, GeneratorError,
            CharacteristicCrossingError) as exc:
        _log(f"numerical consistency failure: {exc}")
        return EXIT_NUMERICAL
    except RelstringError as exc:
        _log(f"error: {exc}")
        return EXIT_VALIDATION
    except (OSError, json.JSONDecodeError) as exc:
        _log(f"I/O error: {exc}")
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
