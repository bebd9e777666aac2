"""Command-line front end: run, sweep, verify, plot, list-presets."""
from __future__ import annotations

import argparse
import csv
import datetime as _dt
import json
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np
from jsonschema import Draft202012Validator

from .engine import RunResult, run_experiment, sweep
from .hamiltonian import PhysicsError, mhz
from .linalg import LinalgError
from .protocols import (
    PRESETS,
    THREE_LEVEL_DWELL,
    THREE_LEVEL_STEP,
    TWO_LEVEL_K,
    TWO_LEVEL_TAU_PATH,
    Experiment,
    build_stirap,
    build_stirap_pair,
    build_three_level_pipulse,
    build_two_level_case,
    pipulse_area,
    preset,
)
from .schedule import ScheduleError

EXIT_OK, EXIT_FAILED, EXIT_CONFIG, EXIT_PHYSICS = 0, 1, 2, 3

_POSITIVE = {"type": "number", "exclusiveMinimum": 0}

EXPERIMENT_SCHEMA = {
    "type": "object",
    "required": ["model"],
    "additionalProperties": False,
    "properties": {
        "model": {"enum": ["two-level", "three-level", "stirap"]},
        "case": {"enum": ["i", "ii", "iii"]},
        "regime": {"enum": ["ideal", "practical"]},
        "k": {"type": "integer", "minimum": 0},
        "pulse_amp_mhz": _POSITIVE,
        "omega_bias_mhz": {"type": "number"},
        "tau_path_us": _POSITIVE,
        "dwell_us": _POSITIVE,
        "tau_us": _POSITIVE,
        "pump_area_rad": _POSITIVE,
        "label": {"type": "string"},
    },
}

CONFIG_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "preset": {"enum": sorted(PRESETS)},
        "experiment": EXPERIMENT_SCHEMA,
        "grid_step_us": _POSITIVE,
        "out": {"type": "string"},
    },
}

SWEEP_SCHEMA = {
    "type": "object",
    "required": ["runs"],
    "additionalProperties": False,
    "properties": {
        "runs": {"type": "array", "minItems": 1, "items": CONFIG_SCHEMA},
        "out": {"type": "string"},
    },
}


class ConfigError(ValueError):
    pass


def _schema_errors(doc, schema) -> list[str]:
    errors = []
    for err in sorted(Draft202012Validator(schema).iter_errors(doc), key=lambda e: list(e.path)):
        where = "/".join(str(p) for p in err.path) or "<root>"
        errors.append(f"{where}: {err.message}")
    return errors


def validate_config(doc) -> None:
    errors = _schema_errors(doc, CONFIG_SCHEMA)
    if isinstance(doc, dict):
        present = [k for k in ("preset", "experiment") if k in doc]
        if not present:
            errors.append("<root>: missing field: exactly one of 'preset' or 'experiment' is required")
        elif len(present) == 2:
            errors.append("<root>: 'preset' and 'experiment' are mutually exclusive")
    if errors:
        raise ConfigError("\n".join(errors))


def read_json(path) -> object:
    text = Path(path).read_text()
    if not text.strip():
        return {}
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"not valid JSON: {exc}") from None


def _require(desc: dict, *names):
    missing = [n for n in names if n not in desc]
    if missing:
        raise ConfigError(f"experiment ({desc['model']}): missing field(s) {', '.join(missing)}")


def experiment_from_config(doc: dict) -> Experiment:
    """Build an :class:`Experiment` from a validated config document.

    Frequencies given in MHz become angular frequencies ``2 pi * value``
    rad/us; times are in us.
    """
    validate_config(doc)
    step = doc.get("grid_step_us")
    if "preset" in doc:
        exp = preset(doc["preset"])
    else:
        desc = doc["experiment"]
        amp = mhz(desc["pulse_amp_mhz"]) if "pulse_amp_mhz" in desc else None
        kw = {"grid_step": step} if step is not None else {}
        try:
            exp = _build(desc, amp, kw)
        except ScheduleError as exc:
            raise ConfigError(f"experiment: {exc}") from None
        if desc.get("label"):
            exp = _relabel(exp, desc["label"])
        step = None
    if step is not None:
        exp = exp.with_step(step)
    return exp


def _build(desc, amp, kw) -> Experiment:
    model = desc["model"]
    if model == "two-level":
        _require(desc, "case", "regime")
        exp = build_two_level_case(
            desc["case"],
            desc["regime"],
            k=desc.get("k", TWO_LEVEL_K),
            tau_path=desc.get("tau_path_us", TWO_LEVEL_TAU_PATH),
            pulse_amp=amp,
            **kw,
        )
        if desc.get("omega_bias_mhz"):
            exp = replace(exp, omega_bias=mhz(desc["omega_bias_mhz"]))
        return exp
    if model == "three-level":
        _require(desc, "k")
        if desc["k"] < 1:
            raise ConfigError("experiment (three-level): k must be at least 1")
        return build_three_level_pipulse(
            desc["k"],
            **({"pulse_amp": amp} if amp else {}),
            dwell=desc.get("dwell_us", THREE_LEVEL_DWELL),
            grid_step=kw.get("grid_step", THREE_LEVEL_STEP),
        )
    # stirap: either paired with a K-pulse sequence or given explicitly
    if "tau_us" in desc:
        area = desc.get("pump_area_rad")
        if area is None:
            _require(desc, "k")
            area = pipulse_area(desc["k"], amp or mhz(8.0))
        return build_stirap(desc["tau_us"], area, **kw)
    _require(desc, "k")
    return build_stirap_pair(desc["k"], **({"pulse_amp": amp} if amp else {}), **kw)


def _relabel(exp: Experiment, label: str) -> Experiment:
    return replace(exp, label=label)


# --------------------------------------------------------------------------
# output files


def _fmt(x: float) -> str:
    return f"{x:.11e}"


def trajectory_columns(result: RunResult) -> dict[str, np.ndarray]:
    traj = result.trajectory
    cols = {"t_wall_us": traj.wall_times, "t_path_us": traj.path_times}
    for i, b in enumerate(traj.basis):
        cols[f"re_{b}"] = traj.states[:, i].real
        cols[f"im_{b}"] = traj.states[:, i].imag
    for i, b in enumerate(traj.basis):
        cols[f"pop_{b}"] = traj.populations[:, i]
    cols["fidelity"] = traj.fidelity
    cols["deviation"] = traj.deviation
    cols["omega_rad_per_us"] = traj.omega
    cols["theta_rad"] = traj.theta
    cols["phi_rad"] = traj.phi
    if traj.pump is not None:
        cols["omega_p_rad_per_us"] = traj.pump
        cols["omega_s_rad_per_us"] = traj.stokes
    return cols


def write_trajectory(result: RunResult, path) -> None:
    cols = trajectory_columns(result)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(cols)
        for row in zip(*cols.values()):
            w.writerow([_fmt(float(v)) for v in row])


def read_trajectory(path) -> dict[str, np.ndarray]:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or not rows[0]:
        raise ValueError(f"{path}: empty CSV")
    header, body = rows[0], rows[1:]
    if not body:
        raise ValueError(f"{path}: trajectory has a header but no rows")
    if "t_wall_us" not in header:
        raise ValueError(f"{path}: no t_wall_us column")
    if any(len(r) != len(header) for r in body):
        raise ValueError(f"{path}: ragged rows")
    try:
        data = np.array(body, dtype=float)
    except ValueError:
        raise ValueError(f"{path}: non-numeric entries") from None
    return {name: data[:, i] for i, name in enumerate(header)}


def _to_json(obj) -> str:
    def default(o):
        if isinstance(o, np.generic):
            return o.item()
        if isinstance(o, np.ndarray):
            return o.tolist()
        raise TypeError(f"cannot serialise {type(o).__name__}")

    return json.dumps(obj, indent=2, sort_keys=True, default=default) + "\n"


def write_run(result: RunResult, out: Path) -> None:
    out.mkdir(parents=True, exist_ok=True)
    write_trajectory(result, out / "trajectory.csv")
    summary = dict(result.summary)
    summary["schedule"] = result.experiment.schedule.to_dict()
    (out / "summary.json").write_text(_to_json(summary))
    report = result.condition_report.to_dict()
    report["failed_clauses"] = result.condition_report.failed_clauses()
    (out / "report.json").write_text(_to_json(report))


# --------------------------------------------------------------------------
# SVG plots

PLOT_KINDS = ("populations", "fidelity", "deviation", "pulses")
_COLOURS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e")


def plot_series(data: dict[str, np.ndarray], kind: str) -> list[str]:
    if kind == "populations":
        names = [c for c in data if c.startswith("pop_")]
    elif kind == "pulses":
        names = [c for c in ("omega_p_rad_per_us", "omega_s_rad_per_us") if c in data]
        names = names or ["omega_rad_per_us"]
    else:
        names = [kind]
    missing = [n for n in names if n not in data]
    if not names or missing:
        raise ValueError(f"trajectory lacks columns for {kind}: {missing or names}")
    return names


def render_svg(x, series: dict[str, np.ndarray], title: str, xlabel: str = "t_wall_us") -> str:
    w, h = 640, 400
    left, right, top, bottom = 70, 160, 40, 50
    pw, ph = w - left - right, h - top - bottom
    x = np.asarray(x, float)
    ys = np.concatenate(list(series.values()))
    x0, x1 = float(x.min()), float(x.max())
    y0, y1 = float(ys.min()), float(ys.max())
    if x1 == x0:
        x1 = x0 + 1.0
    if y1 == y0:
        y0, y1 = y0 - 0.5, y1 + 0.5

    def sx(v):
        return left + (v - x0) / (x1 - x0) * pw

    def sy(v):
        return top + ph - (v - y0) / (y1 - y0) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">',
        f'<rect width="{w}" height="{h}" fill="white"/>',
        f'<text x="{left + pw / 2}" y="24" text-anchor="middle" font-size="15">{title}</text>',
        f'<line class="axis" x1="{left}" y1="{top + ph}" x2="{left + pw}" y2="{top + ph}" stroke="black"/>',
        f'<line class="axis" x1="{left}" y1="{top}" x2="{left}" y2="{top + ph}" stroke="black"/>',
    ]
    for v in np.linspace(x0, x1, 5):
        out.append(f'<text x="{sx(v):.2f}" y="{top + ph + 18}" text-anchor="middle" font-size="11">{v:.3g}</text>')
    for v in np.linspace(y0, y1, 5):
        out.append(f'<text x="{left - 6}" y="{sy(v) + 4:.2f}" text-anchor="end" font-size="11">{v:.3g}</text>')
    out.append(f'<text x="{left + pw / 2}" y="{h - 10}" text-anchor="middle" font-size="12">{xlabel}</text>')
    for i, (name, y) in enumerate(series.items()):
        colour = _COLOURS[i % len(_COLOURS)]
        pts = " ".join(f"{sx(a):.2f},{sy(b):.2f}" for a, b in zip(x, y))
        out.append(f'<polyline fill="none" stroke="{colour}" stroke-width="1.5" points="{pts}"><title>{name}</title></polyline>')
        ly = top + 16 + 20 * i
        out.append(f'<line x1="{left + pw + 12}" y1="{ly}" x2="{left + pw + 32}" y2="{ly}" stroke="{colour}" stroke-width="2"/>')
        out.append(f'<text class="legend" x="{left + pw + 38}" y="{ly + 4}" font-size="12">{name}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def plot_run(run_dir, kind: str) -> Path:
    if kind not in PLOT_KINDS:
        raise ValueError(f"unknown plot kind {kind!r}; choose from {', '.join(PLOT_KINDS)}")
    run_dir = Path(run_dir)
    csv_path = run_dir / "trajectory.csv"
    if not csv_path.is_file():
        raise ValueError(f"{csv_path} not found")
    data = read_trajectory(csv_path)
    names = plot_series(data, kind)
    svg = render_svg(data["t_wall_us"], {n: data[n] for n in names}, f"{kind} ({run_dir.name})")
    target = run_dir / f"{kind}.svg"
    target.write_text(svg)
    return target


# --------------------------------------------------------------------------
# commands


def _run_dir(args, doc: dict, exp: Experiment) -> Path:
    if args.out:
        return Path(args.out)
    return Path(doc.get("out") or Path("runs") / exp.label)


def cmd_run(args) -> int:
    if not args.config:
        raise ConfigError("run needs --config")
    doc = read_json(args.config)
    exp = experiment_from_config(doc)
    if args.step:
        exp = exp.with_step(args.step)
    result = run_experiment(exp)
    out = _run_dir(args, doc, exp)
    write_run(result, out)
    s = result.summary
    print(f"{exp.label}: F={s['final_fidelity']:.6f} D={s['final_deviation']:.3e} tau={s['tau_total']:.4g} us -> {out}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    if args.config:
        doc = read_json(args.config)
        errors = _schema_errors(doc, SWEEP_SCHEMA)
        if errors:
            raise ConfigError("\n".join(errors))
        docs = doc["runs"]
        root = Path(args.out or doc.get("out") or "runs")
    else:
        docs = [{"preset": name} for name in PRESETS]
        root = Path(args.out or "runs")
    exps = [experiment_from_config(d) for d in docs]
    if args.step:
        exps = [e.with_step(args.step) for e in exps]
    results = sweep(exps)
    rows = []
    for d, r in zip(docs, results):
        out = Path(d["out"]) if "out" in d else root / r.experiment.label
        write_run(r, out)
        rows.append(r.summary)
        print(f"{r.experiment.label}: F={r.summary['final_fidelity']:.6f}")
    root.mkdir(parents=True, exist_ok=True)
    (root / "sweep_summary.json").write_text(_to_json(rows))
    return EXIT_OK


def cmd_verify(args) -> int:
    from .verification import run_all

    checks = run_all(width_scale=args.pulse_width_scale)
    for c in checks:
        print(c.line())
    report = {
        "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(),
        "passed": all(c.passed for c in checks),
        "checks": [c.to_dict() for c in checks],
    }
    out = Path(args.out or ".")
    out.mkdir(parents=True, exist_ok=True)
    (out / "acceptance_report.json").write_text(_to_json(report))
    failed = sum(not c.passed for c in checks)
    print(f"{len(checks) - failed}/{len(checks)} checks passed")
    return EXIT_OK if not failed else EXIT_FAILED


def cmd_plot(args) -> int:
    if not args.out:
        raise ValueError("plot needs --out RUN_DIR")
    target = plot_run(args.out, args.kind)
    print(target)
    return EXIT_OK


def cmd_list_presets(args) -> int:
    for name in PRESETS:
        print(name)
    return EXIT_OK


COMMANDS = {
    "run": cmd_run,
    "sweep": cmd_sweep,
    "verify": cmd_verify,
    "plot": cmd_plot,
    "list-presets": cmd_list_presets,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="adiashort", description=__doc__)
    p.add_argument("command", choices=list(COMMANDS))
    p.add_argument("--config", help="JSON experiment (run) or run list (sweep)")
    p.add_argument("--out", help="output directory; for plot, the run directory")
    p.add_argument("--step", type=float, help="grid step in us")
    p.add_argument("--kind", default="populations", choices=PLOT_KINDS, help="plot kind")
    p.add_argument("--pulse-width-scale", type=float, default=1.0, help=argparse.SUPPRESS)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.step is not None and args.step <= 0:
        print("error: --step must be positive", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error:\n{exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (PhysicsError, LinalgError) as exc:
        print(f"physics error: {exc}", file=sys.stderr)
        return EXIT_PHYSICS
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILED


if __name__ == "__main__":
    sys.exit(main())
