"""Command-line interface: filter, refine, score, perturb and full pipeline runs.

Configuration comes from an optional ``key=value`` file (``#`` starts a
comment) given with ``--config``; command-line flags override it. Flags
mirror the keys one-to-one with dashes (``w_min`` <-> ``--w-min``).

Exit status: 0 success, 1 I/O failure, 2 invalid input or configuration,
3 internal invariant breach.
"""

from __future__ import annotations

import argparse
import collections
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import fileio
from .errors import InvariantError, PupilPostError, ValidationError
from .flow import FlowParams, refine_with_trace
from .jitter import JitterParams, jitter_metric
from .median import MedianFilterParams, filter_with_windows
from .metrics import DEFAULT_THRESHOLDS, evaluate
from .perturb import PerturbationSpec, format_kinds, parse_kinds, perturb

EXIT_OK, EXIT_IO, EXIT_VALIDATION, EXIT_INTERNAL = 0, 1, 2, 3

# key -> (type, default); order fixes the parameter echo in reports
PARAMETERS = {
    "w_base": (int, 5),
    "w_min": (int, 5),
    "w_max": (int, 20),
    "percentile": (float, 75.0),
    "method": (str, "covariance"),
    "tau": (float, 8.0),
    "c": (int, 5),
    "gamma": (float, 2.0),
    "lambda": (float, 0.75),
    "epsilon": (float, 1e-8),
    "bins": (int, 32),
    "bandwidth": (float, 1.0),
    "eps_floor": (float, 1e-9),
    "thresholds": ("floats", DEFAULT_THRESHOLDS),
}
EXTRA = {
    "seed": (int, 0),
    "perturbations": (str, None),
}
PATHS = ("input", "truth", "events", "raw", "output", "report", "plot_data", "output_dir")
ALL_KEYS = (*PARAMETERS, *EXTRA, *PATHS)


def _convert(key: str, kind, value):
    if value is None or not isinstance(value, str):
        return value
    try:
        if kind == "floats":
            items = [v.strip() for v in value.split(",") if v.strip()]
            if not items:
                raise ValueError("empty list")
            return tuple(float(v) for v in items)
        if kind is int:
            return int(value)
        if kind is float:
            return float(value)
        return value.strip()
    except ValueError as exc:
        raise ValidationError(f"{key}: cannot parse {value!r} ({exc})") from None


def read_config_file(path) -> dict:
    out = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            key = key.strip().replace("-", "_")
            if not sep:
                raise ValidationError(f"{path}:{lineno}: expected key=value, got {raw.rstrip()!r}")
            if key not in ALL_KEYS:
                raise ValidationError(f"{path}:{lineno}: unknown key {key!r}")
            out[key] = value.strip()
    return out


def _fmt_param(value) -> str:
    if isinstance(value, tuple):
        return ",".join(format(v, "g") for v in value)
    return str(value)


@dataclass
class PipelineConfig:
    values: dict = field(default_factory=dict)

    def __post_init__(self):
        merged = {k: d for k, (_, d) in {**PARAMETERS, **EXTRA}.items()}
        merged.update({k: None for k in PATHS})
        for key, value in self.values.items():
            if key not in ALL_KEYS:
                raise ValidationError(f"unknown configuration key {key!r}")
            kind = {**PARAMETERS, **EXTRA}.get(key, (str, None))[0]
            merged[key] = _convert(key, kind, value)
        self.values = merged
        # building the parameter objects validates every field up front
        self.median = MedianFilterParams(
            w_base=merged["w_base"], w_min=merged["w_min"], w_max=merged["w_max"],
            percentile=merged["percentile"], method=merged["method"])
        self.flow = FlowParams(tau=merged["tau"], c=merged["c"], gamma=merged["gamma"])
        self.jitter = JitterParams(
            lam=merged["lambda"], epsilon=merged["epsilon"], bins=merged["bins"],
            bandwidth=merged["bandwidth"], eps_floor=merged["eps_floor"])
        self.thresholds = tuple(merged["thresholds"])
        if not self.thresholds or any(not th > 0 for th in self.thresholds):
            raise ValidationError(f"thresholds: must be positive, got {list(self.thresholds)}")
        if not 0 <= merged["seed"] < 2**64:
            raise ValidationError(f"seed: must be a 64-bit unsigned integer, got {merged['seed']}")

    def __getitem__(self, key):
        return self.values[key]

    def path(self, key: str) -> Path:
        value = self.values.get(key)
        if not value:
            raise ValidationError(f"{key}: required path not given (use --{key.replace('_', '-')})")
        return Path(value)

    def echo(self) -> dict:
        """Effective algorithm parameters, in a fixed order, without paths."""
        out = collections.OrderedDict()
        for key in PARAMETERS:
            value = self.values[key]
            out[key] = _fmt_param(self.median.method.value if key == "method" else value)
        return out


def _check(cond: bool, message: str) -> None:
    if not cond:
        raise InvariantError(message)


def run_filter(cfg: PipelineConfig, input_path, output_path, out=sys.stdout):
    traj = fileio.read_trajectory(input_path)
    filtered, lengths = filter_with_windows(traj, cfg.median)
    _check(len(filtered) == len(traj), "filter changed the trajectory length")
    lo, hi = cfg.median.odd_bounds
    _check(bool(np.all((lengths % 2 == 1) & (lengths >= lo) & (lengths <= hi))), "window length outside odd bounds")
    fileio.write_trajectory(filtered, output_path)
    values, counts = np.unique(lengths, return_counts=True)
    hist = "  ".join(f"{v}:{c}" for v, c in zip(values, counts))
    print(f"filtered {len(traj)} samples -> {output_path}", file=out)
    print(f"window lengths  {hist}", file=out)
    return filtered


def run_refine(cfg: PipelineConfig, input_path, events_path, output_path, out=sys.stdout):
    filtered = fileio.read_trajectory(input_path)
    stream = fileio.read_events(events_path)
    refined, trace = refine_with_trace(stream, filtered, cfg.flow)
    shift = np.hypot(*(refined.xy - filtered.xy).T)
    _check(bool(np.all((shift == 0) | (np.abs(shift - 1) < 1e-9))), "refinement applied a non-unit shift")
    fileio.write_trajectory(refined, output_path)
    print(f"refined {len(refined)} predictions with {len(stream)} events -> {output_path}", file=out)
    print(f"shifted {int(trace['shifted'].sum())} predictions", file=out)
    return refined


def run_score(cfg: PipelineConfig, pred_path, truth_path, report_path, plot_path=None, raw_path=None, out=sys.stdout):
    pred = fileio.read_trajectory(pred_path)
    truth = fileio.read_trajectory(truth_path)
    metrics = evaluate(pred, truth, cfg.thresholds)
    jitter = jitter_metric(pred, truth, cfg.jitter)
    _check(jitter.jm >= 0 and np.isfinite(jitter.jm), "jitter metric is negative or not finite")
    fileio.write_report(metrics, jitter, report_path, cfg.echo())
    if plot_path:
        raw = fileio.read_trajectory(raw_path) if raw_path else pred
        fileio.write_plot_data(plot_path, truth, raw, pred)
    acc = "  ".join(f"{fileio.threshold_key(t)}={a:.4f}" for t, a in metrics.p_at.items())
    print(f"{acc}  l2={metrics.l2:.4f}  l1={metrics.l1:.4f}  mse={metrics.mse:.4f}  jm={jitter.jm:.4f}", file=out)
    return metrics, jitter


def cmd_filter(cfg: PipelineConfig, out=sys.stdout) -> int:
    run_filter(cfg, cfg.path("input"), cfg.path("output"), out)
    return EXIT_OK


def cmd_refine(cfg: PipelineConfig, out=sys.stdout) -> int:
    run_refine(cfg, cfg.path("input"), cfg.path("events"), cfg.path("output"), out)
    return EXIT_OK


def cmd_score(cfg: PipelineConfig, out=sys.stdout) -> int:
    run_score(cfg, cfg.path("input"), cfg.path("truth"), cfg.path("report"),
              cfg["plot_data"], cfg["raw"], out)
    return EXIT_OK


def cmd_perturb(cfg: PipelineConfig, out=sys.stdout) -> int:
    if not cfg["perturbations"]:
        raise ValidationError("perturbations: required (e.g. --perturbations 'noise:0.3;blink:100,3,30')")
    spec = PerturbationSpec(parse_kinds(cfg["perturbations"]), seed=cfg["seed"])
    truth = fileio.read_trajectory(cfg.path("input"))
    output = cfg.path("output")
    fileio.write_trajectory(perturb(truth, spec), output)
    print(f"seed={spec.seed} perturbations={format_kinds(spec.kinds)} -> {output}", file=out)
    return EXIT_OK


def cmd_pipeline(cfg: PipelineConfig, out=sys.stdout) -> int:
    """filter -> refine -> score, each stage reading the previous stage's file."""
    raw_path = cfg.path("input")
    out_dir = cfg.path("output_dir")
    if not out_dir.is_dir():
        raise FileNotFoundError(2, "output directory does not exist", str(out_dir))
    truth_path = cfg.path("truth")
    fileio.write_trajectory(fileio.read_trajectory(raw_path), out_dir / "raw.csv")
    run_filter(cfg, raw_path, out_dir / "filtered.csv", out)
    run_refine(cfg, out_dir / "filtered.csv", cfg.path("events"), out_dir / "refined.csv", out)
    for stage in ("raw", "filtered"):
        print(f"[{stage}]", end=" ", file=out)
        run_score(cfg, out_dir / f"{stage}.csv", truth_path, out_dir / f"report_{stage}.txt", out=out)
    print("[refined]", end=" ", file=out)
    run_score(cfg, out_dir / "refined.csv", truth_path, out_dir / "report.txt",
              out_dir / "plot.csv", out_dir / "raw.csv", out)
    return EXIT_OK


COMMANDS = {
    "filter": (cmd_filter, "motion-aware median filtering of a trajectory"),
    "refine": (cmd_refine, "event optical-flow refinement of a filtered trajectory"),
    "score": (cmd_score, "positional metrics and jitter metric against ground truth"),
    "perturb": (cmd_perturb, "synthesise a degraded trajectory from ground truth"),
    "pipeline": (cmd_pipeline, "filter, refine and score in one run"),
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key=value configuration file; flags override it")
    for key in ALL_KEYS:
        flag = "--" + key.replace("_", "-")
        common.add_argument(flag, dest=key, default=None, metavar=key.upper())
    parser = argparse.ArgumentParser(prog="pupilpost", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, help_text) in COMMANDS.items():
        sub.add_parser(name, parents=[common], help=help_text, description=help_text)
    return parser


def load_config(args: argparse.Namespace) -> PipelineConfig:
    values = read_config_file(args.config) if args.config else {}
    values.update({k: getattr(args, k) for k in ALL_KEYS if getattr(args, k) is not None})
    return PipelineConfig(values)


def main(argv: Optional[list] = None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args)
        return COMMANDS[args.command][0](cfg, out)
    except ValidationError as exc:
        print(f"pupilpost: invalid input: {exc}", file=err)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"pupilpost: I/O error: {exc}", file=err)
        return EXIT_IO
    except (InvariantError, PupilPostError) as exc:
        print(f"pupilpost: internal error: {exc}", file=err)
        return EXIT_INTERNAL
    except Exception as exc:  # noqa: BLE001
        print(f"pupilpost: internal error: {type(exc).__name__}: {exc}", file=err)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
