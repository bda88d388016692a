"""Command-line experiment runner: ``probreach <bound|mcs|gpc|trials|acc-oracle>``.

Every stochastic command takes ``--seed`` and is a deterministic function of
its configuration: rerunning writes byte-identical CSVs.  Flags may also be
loaded from a flat ``key = value`` config file via ``--config``; explicit
flags win over file values.

Exit codes: 0 success, 2 bad parameters, 3 I/O failure, 4 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import sys
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Optional

import numpy as np

from .acc_oracle import boundary_gap, is_safe
from .core import Box, RngStream
from .dynamics import AccSystem, IntegrationError, acc_collides
from .experiments import (
    ACC_REGION,
    GPC_STRATEGIES,
    acc_safe_label_fn,
    default_horizon,
    default_initial_box,
    estimate_grid,
    grid_accuracy,
    grid_axes,
    grid_points,
    run_gpc_strategy,
    state_names,
    system_by_name,
)
from .gpc import FitError, posterior
from .mcs import ReachSpec, coverage_trial_suite, mcs_reach, sample_bound
from .svg import SvgCanvas, contour_segments

SYSTEMS = ("acc", "linear-demo", "rotation-demo", "param-linear-demo")


@dataclass
class ExperimentConfig:
    method: str
    system: str = "acc"
    box: Optional[Box] = None
    m: Optional[int] = None
    n: Optional[int] = None
    pool_size: int = 1000
    epsilon: float = 0.1
    delta: float = 0.05
    t0: Optional[float] = None
    t1: Optional[float] = None
    step: float = 1e-3
    seed: int = 0
    threshold: float = 0.5
    regularization: float = 1e-6
    vf: float = 5.0
    a: float = 4.9
    b: float = 1.0
    trials: int = 20
    validation_count: int = 10000
    grid: int = 200
    strategy: str = "adaptive"
    label_source: str = "oracle"
    proj: tuple[int, int] = (0, 1)
    out: Path = Path(".")


def _fmt(x) -> str:
    """Shortest round-trip decimal for a float."""
    return repr(float(x))


def _fmt17(x) -> str:
    return f"{float(x):.17g}"


def _parse_box(text: str) -> Box:
    lows, highs = [], []
    for part in text.split(","):
        lo, sep, hi = part.partition(":")
        if not sep:
            raise ValueError(f"bad box component {part!r}; expected lo:hi")
        lows.append(float(lo))
        highs.append(float(hi))
    return Box(lows, highs)


def _parse_proj(text: str) -> tuple[int, int]:
    parts = text.split(",")
    if len(parts) != 2:
        raise ValueError("projection must be two comma-separated axis indices")
    return int(parts[0]), int(parts[1])


def _parse_scalar(text: str):
    if len(text) >= 2 and text[0] == text[-1] and text[0] in "\"'":
        return text[1:-1]
    if text.lower() in ("true", "false"):
        return text.lower() == "true"
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            pass
    return text


def _read_config_file(path: str) -> dict:
    values = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, val = line.partition("=")
            if not sep:
                raise ValueError(f"{path}:{lineno}: expected key = value")
            values[key.strip().replace("-", "_")] = _parse_scalar(val.strip())
    return values


def _build_config(args: argparse.Namespace) -> ExperimentConfig:
    names = {f.name for f in fields(ExperimentConfig)}
    merged: dict = {"method": args.method}
    if getattr(args, "config", None):
        file_values = _read_config_file(args.config)
        unknown = set(file_values) - names
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        merged.update(file_values)
    for key, value in vars(args).items():
        if key in names and value is not None:
            merged[key] = value
    if isinstance(merged.get("box"), str):
        merged["box"] = _parse_box(merged["box"])
    if isinstance(merged.get("proj"), str):
        merged["proj"] = _parse_proj(merged["proj"])
    if "out" in merged:
        merged["out"] = Path(merged["out"])
    cfg = ExperimentConfig(**merged)
    if cfg.method.startswith("gpc"):
        cfg.method = f"gpc-{cfg.strategy}"
    return cfg


def _write_csv(path: Path, header: list[str], rows) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def cmd_bound(cfg: ExperimentConfig) -> int:
    if cfg.n is None:
        raise ValueError("--n is required")
    print(sample_bound(cfg.n, cfg.epsilon, cfg.delta))
    return 0


def _reach_inputs(cfg: ExperimentConfig):
    system = system_by_name(cfg.system, AccSystem(cfg.a, cfg.b))
    box = cfg.box if cfg.box is not None else default_initial_box(cfg.system, cfg.vf)
    t0, t1 = default_horizon(cfg.system)
    spec = ReachSpec(
        cfg.epsilon,
        cfg.delta,
        cfg.t0 if cfg.t0 is not None else t0,
        cfg.t1 if cfg.t1 is not None else t1,
        box,
    )
    return system, spec


def cmd_mcs(cfg: ExperimentConfig) -> int:
    system, spec = _reach_inputs(cfg)
    result = mcs_reach(system, spec, RngStream(cfg.seed), cfg.step, sample_count=cfg.m)
    names = state_names(cfg.system, spec.dimension)
    cfg.out.mkdir(parents=True, exist_ok=True)

    hull_rows = [
        [str(i), _fmt17(result.hull.lower[i]), _fmt17(result.hull.upper[i])]
        for i in range(spec.dimension)
    ]
    _write_csv(cfg.out / "hull.csv", ["dim", "lower", "upper"], hull_rows)

    sample_rows = [
        [_fmt(spec.t1)] + [_fmt(v) for v in row] for row in result.final_states
    ]
    _write_csv(cfg.out / "samples.csv", ["t"] + names, sample_rows)

    ix, iy = cfg.proj
    ix, iy = min(ix, spec.dimension - 1), min(iy, spec.dimension - 1)
    px, py = result.final_states[:, ix], result.final_states[:, iy]
    pad_x = 0.1 * max(np.ptp(px), 1e-9)
    pad_y = 0.1 * max(np.ptp(py), 1e-9)
    canvas = SvgCanvas(
        (px.min() - pad_x, px.max() + pad_x),
        (py.min() - pad_y, py.max() + pad_y),
        title=f"interval hull, m={result.sample_count}, "
        f"eps={cfg.epsilon}, delta={cfg.delta}",
    )
    canvas.frame(names[ix], names[iy])
    for x, y in zip(px, py):
        canvas.circle(x, y, r=1.6, stroke="#1f77b4")
    canvas.rect(
        result.hull.lower[ix], result.hull.lower[iy],
        result.hull.upper[ix], result.hull.upper[iy],
        stroke="#000", width=2.0,
    )
    canvas.write(cfg.out / "mcs.svg")

    tag = "certified" if result.certified else "uncertified"
    print(f"{tag} hull from m={result.sample_count} samples written to {cfg.out}")
    return 0


def cmd_gpc(cfg: ExperimentConfig) -> int:
    if cfg.system != "acc":
        raise ValueError("gpc scoring requires the acc system (analytic ground truth)")
    params = AccSystem(cfg.a, cfg.b)
    region = cfg.box if cfg.box is not None else ACC_REGION
    m = cfg.m if cfg.m is not None else 200

    if cfg.label_source == "oracle":
        label_fn = acc_safe_label_fn(cfg.vf, params)
    elif cfg.label_source == "simulate":

        def label_fn(point):
            return 0.0 if acc_collides(point[0], point[1], cfg.vf, params, cfg.step) else 1.0

    else:
        raise ValueError(f"unknown label source {cfg.label_source!r}")

    estimate = run_gpc_strategy(
        cfg.strategy, label_fn, region, m, cfg.pool_size,
        cfg.threshold, cfg.regularization, RngStream(cfg.seed),
    )
    cfg.out.mkdir(parents=True, exist_ok=True)

    pts = grid_points(region, cfg.grid, cfg.grid)
    predicted = estimate_grid(estimate, region, cfg.grid, cfg.grid)
    truth = np.asarray(is_safe(pts[:, 0], pts[:, 1], cfg.vf, params.a, params.b))
    accuracy = grid_accuracy(predicted, truth)

    grid_rows = [
        [_fmt(p[0]), _fmt(p[1]), str(int(pr)), str(int(tr))]
        for p, pr, tr in zip(pts, predicted, truth)
    ]
    _write_csv(cfg.out / "grid.csv", ["h", "vL", "predicted", "true"], grid_rows)

    sample_rows = [
        [_fmt(p[0]), _fmt(p[1]), str(int(lab))]
        for p, lab in zip(estimate.model.points, estimate.model.labels)
    ]
    _write_csv(cfg.out / "samples.csv", ["h", "vL", "label"], sample_rows)

    canvas = SvgCanvas(
        (region.lower[0], region.upper[0]),
        (region.lower[1], region.upper[1]),
        title=f"{cfg.strategy} GPC, m={m}, accuracy={accuracy:.4f}",
    )
    canvas.frame("h", "vL")
    if not estimate.degenerate:
        xs, ys = grid_axes(region, cfg.grid, cfg.grid)
        mean, _ = posterior(estimate.model, pts)
        level = contour_segments(xs, ys, mean.reshape(cfg.grid, cfg.grid).T, cfg.threshold)
        canvas.segments(level, stroke="#d62728", dash="6,4")
    vls = np.linspace(region.lower[1], region.upper[1], 400)
    gaps = np.asarray(boundary_gap(vls, cfg.vf, params.a, params.b))
    keep = (gaps >= region.lower[0]) & (gaps <= region.upper[0])
    if np.any(keep):
        canvas.polyline(gaps[keep], vls[keep], stroke="#000", width=2.0)
    for point, label in zip(estimate.model.points, estimate.model.labels):
        if label == 0.0:
            canvas.circle(point[0], point[1])
        else:
            canvas.cross(point[0], point[1])
    canvas.write(cfg.out / "gpc.svg")

    if estimate.degenerate:
        print("warning: training labels were one-class; constant classifier returned")
    print(f"grid accuracy vs oracle: {accuracy:.6f}")
    return 0


def cmd_trials(cfg: ExperimentConfig) -> int:
    system, spec = _reach_inputs(cfg)
    fraction, records = coverage_trial_suite(
        system, spec, cfg.trials, cfg.validation_count, RngStream(cfg.seed), cfg.step
    )
    cfg.out.mkdir(parents=True, exist_ok=True)
    rows = [
        [str(r.trial), str(r.seed), str(r.sample_count), _fmt(r.coverage), str(int(r.success))]
        for r in records
    ]
    _write_csv(cfg.out / "trials.csv", ["trial", "seed", "m", "coverage", "success"], rows)
    print(
        f"success fraction: {fraction:.4f} over {cfg.trials} trials "
        f"(coverage target 1-eps = {1 - spec.epsilon}, promised confidence "
        f"1-delta = {1 - spec.delta})"
    )
    return 0


def cmd_acc_oracle(cfg: ExperimentConfig) -> int:
    params = AccSystem(cfg.a, cfg.b)
    region = cfg.box if cfg.box is not None else ACC_REGION
    pts = grid_points(region, cfg.grid, cfg.grid)
    safe = np.asarray(is_safe(pts[:, 0], pts[:, 1], cfg.vf, params.a, params.b))
    cfg.out.mkdir(parents=True, exist_ok=True)
    rows = [[_fmt(p[0]), _fmt(p[1]), str(int(s))] for p, s in zip(pts, safe)]
    _write_csv(cfg.out / "oracle.csv", ["h", "vL", "safe"], rows)
    print(f"oracle grid ({cfg.grid}x{cfg.grid}, vF={cfg.vf}) written to {cfg.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="probreach",
        description="Data-driven reachable set estimation with probabilistic guarantees.",
    )
    sub = parser.add_subparsers(dest="method", required=True)

    def common(p, *, reach=False):
        p.add_argument("--config", help="flat key = value config file; flags override")
        p.add_argument("--seed", type=int, help="master seed (default 0)")
        p.add_argument("--out", help="output directory (default .)")
        if reach:
            p.add_argument("--system", choices=SYSTEMS)
            p.add_argument("--box", help="initial box as lo:hi,lo:hi,...")
            p.add_argument("--epsilon", type=float)
            p.add_argument("--delta", type=float)
            p.add_argument("--t0", type=float)
            p.add_argument("--t1", type=float)
            p.add_argument("--step", type=float)

    p_bound = sub.add_parser("bound", help="print the certified sample count")
    p_bound.add_argument("--n", type=int)
    p_bound.add_argument("--epsilon", type=float)
    p_bound.add_argument("--delta", type=float)
    p_bound.add_argument("--config", help="flat key = value config file; flags override")
    p_bound.set_defaults(func=cmd_bound)

    p_mcs = sub.add_parser("mcs", help="Monte Carlo interval overapproximation")
    common(p_mcs, reach=True)
    p_mcs.add_argument("--m", type=int, help="override the certified sample count")
    p_mcs.add_argument("--proj", help="2-D projection axes for the SVG, e.g. 0,1")
    p_mcs.add_argument("--a", type=float)
    p_mcs.add_argument("--b", type=float)
    p_mcs.add_argument("--vf", type=float)
    p_mcs.set_defaults(func=cmd_mcs)

    p_gpc = sub.add_parser("gpc", help="GP classifier safe-set estimation")
    common(p_gpc)
    p_gpc.add_argument("--strategy", choices=GPC_STRATEGIES)
    p_gpc.add_argument("--m", type=int, help="labeling budget (default 200)")
    p_gpc.add_argument("--pool-size", dest="pool_size", type=int)
    p_gpc.add_argument("--threshold", type=float)
    p_gpc.add_argument("--regularization", type=float)
    p_gpc.add_argument("--grid", type=int, help="scoring grid resolution per axis")
    p_gpc.add_argument("--box", help="analysis region as lo:hi,lo:hi")
    p_gpc.add_argument("--a", type=float)
    p_gpc.add_argument("--b", type=float)
    p_gpc.add_argument("--vf", type=float)
    p_gpc.add_argument("--step", type=float)
    p_gpc.add_argument(
        "--label-source", dest="label_source", choices=("oracle", "simulate"),
        help="label via the analytic predicate (default) or braking simulation",
    )
    p_gpc.set_defaults(func=cmd_gpc, system="acc")

    p_trials = sub.add_parser("trials", help="empirical confidence check for mcs")
    common(p_trials, reach=True)
    p_trials.add_argument("--trials", type=int)
    p_trials.add_argument("--validation-count", dest="validation_count", type=int)
    p_trials.add_argument("--a", type=float)
    p_trials.add_argument("--b", type=float)
    p_trials.add_argument("--vf", type=float)
    p_trials.set_defaults(func=cmd_trials)

    p_oracle = sub.add_parser("acc-oracle", help="true safe-set grid")
    common(p_oracle)
    p_oracle.add_argument("--grid", type=int)
    p_oracle.add_argument("--box", help="analysis region as lo:hi,lo:hi")
    p_oracle.add_argument("--a", type=float)
    p_oracle.add_argument("--b", type=float)
    p_oracle.add_argument("--vf", type=float)
    p_oracle.set_defaults(func=cmd_acc_oracle, method="acc-oracle-grid")

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _build_config(args)
        return args.func(cfg)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 3
    except (FitError, IntegrationError, np.linalg.LinAlgError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
