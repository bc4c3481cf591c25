"""splitib: synth -> train -> analyze -> simulate, plus standalone MI estimation.

Exit codes: 0 success, 1 contract or verification failure, 2 usage or
configuration error.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np
import pandas as pd

from cascade import CascadeModel, OrderingReport, augment, train_phase1, train_phase2, verify_ordering
from estimators import (
    BinningConfig,
    binning_mi,
    conditional_gcmi,
    gcmi,
    kde_mi_label,
    plugin_discrete_mi,
)
from infoplane import (
    analysis_summary,
    compute_plane,
    export_curves,
    redundancy_truncation,
    temporal_compression_curve,
    temporal_info_curve,
    write_plot_script,
)
from infoplane.export import write_summary
from nncore.records import ActivationRecorder, load_records, probe_indices, save_records
from splitsim import run as run_simulation
from utils.config import RunConfig, load_run_config
from utils.errors import ArtifactError, ConfigError, SplitIBError
from utils.load_data import prepare_dataset
from utils.synthetic import synth_generate

logger = logging.getLogger("splitib")

ROLES = ("x", "y", "z", "ignore")
SIM_MODES = ("adaptive", "informative", "compressed")


# ---- subcommands ----

def cmd_synth(cfg: RunConfig) -> int:
    dataset = synth_generate(cfg.synth)
    csv_path, _ = dataset.write(cfg.dataset_path.parent, stem=cfg.dataset_path.stem)
    print(f"wrote {csv_path} (oracle plug-in MI {dataset.oracle_mi_bits:.3f} bits)")
    return 0


def _probe_paths(out: Path) -> tuple[Path, Path]:
    return out / "records" / "probe_x.npy", out / "records" / "probe_y.npy"


def cmd_train(cfg: RunConfig) -> int:
    out = cfg.out_dir
    cfg.check_dataset_sidecar()
    train, test, schema = prepare_dataset(cfg.dataset_path, cfg.schema, cfg.test_fraction, cfg.seed)
    (out / "schema.json").write_text(json.dumps(schema.to_dict(), indent=2, sort_keys=True))

    idx = probe_indices(len(train), cfg.cascade.probe_size, cfg.seed)
    probe_x, probe_y = train.inputs[idx], train.labels[idx]
    recorder = ActivationRecorder(probe_x, every=cfg.cascade.record_every, include_decoder=cfg.cascade.record_decoder)

    phase1 = train_phase1(train, cfg.cascade, recorder=recorder)
    phase1.save(out / "checkpoints" / "phase1.json")
    model = train_phase2(augment(phase1), train, recorder=recorder)
    model.save(out / "checkpoints" / "phase2.json")

    save_records(recorder.records, out / "records")
    x_path, y_path = _probe_paths(out)
    np.save(x_path, probe_x, allow_pickle=False)
    np.save(y_path, probe_y, allow_pickle=False)
    (out / "history.json").write_text(json.dumps(model.history, indent=2, sort_keys=True))

    report = verify_ordering(model, test, cfg.analysis.estimator)
    report.write(out / "ordering_report.json")
    for m in report.modes:
        print(f"{m.mode:>12}: accuracy {m.accuracy:.3f}  I(X;z) {m.i_xz_bits:.2f} bits  "
              f"I(Y;out) {m.i_y_out_bits:.2f} bits  payload {m.payload_dim * 4} B")
    print(f"ordering {'PASS' if report.passed else 'FAIL'}")
    return 0 if report.passed else 1


def cmd_analyze(cfg: RunConfig) -> int:
    out = cfg.out_dir
    records = load_records(out / "records")
    x_path, y_path = _probe_paths(out)
    try:
        probe_x = np.load(x_path, allow_pickle=False)
        probe_y = np.load(y_path, allow_pickle=False)
    except FileNotFoundError as exc:
        raise ArtifactError("probe batch not found", exc.filename) from exc

    acfg = cfg.analysis
    phase1 = [r for r in records if r.phase == 1]
    redundancy = redundancy_truncation(phase1, probe_x, acfg.threshold_bits, acfg.k_max, acfg)
    plane = compute_plane(records, probe_x, probe_y, acfg, first_layer_history=redundancy.history)
    info_curve = temporal_info_curve(phase1, probe_y, tau=acfg.tau, cfg=acfg)
    compression = temporal_compression_curve(phase1, probe_x, cfg=acfg)

    analysis = out / "analysis"
    export_curves(plane, analysis / "plane.csv")
    export_curves(info_curve, analysis / "temporal_y.csv")
    export_curves(compression, analysis / "temporal_x.csv")
    redundancy.write(analysis / "redundancy.json")
    summary = analysis_summary(plane, info_curve, compression, redundancy)
    write_summary(summary, analysis / "summary.json")
    write_plot_script(analysis)
    print(f"wrote {len(plane)} plane points and {len(info_curve) + len(compression)} temporal points to {analysis}")
    return 0


def cmd_simulate(cfg: RunConfig, modes=SIM_MODES) -> int:
    out = cfg.out_dir
    cfg.check_dataset_sidecar()
    model = CascadeModel.load(out / "checkpoints" / "phase2.json")
    _, test, _ = prepare_dataset(cfg.dataset_path, cfg.schema, cfg.test_fraction, cfg.seed)
    prior = None
    report_path = out / "ordering_report.json"
    if report_path.exists():
        report = OrderingReport.from_dict(json.loads(report_path.read_text()))
        prior = {m.mode: m.accuracy for m in report.modes}

    sim = cfg.simulation
    for name in modes:
        policy = sim.policy
        if name != "adaptive":
            policy = type(policy)(**{**policy.to_dict(), "forced": name})
        trace = run_simulation(model, test, sim.link, policy, sim.steps, seed=sim.seed, prior_accuracy=prior)
        trace.write(out / "sim", name)
        s = trace.summary
        print(f"{name:>12}: {s['total_bytes']} B, mean latency {s['mean_latency_ms']:.2f} ms, "
              f"accuracy {s['accuracy']:.3f}, {s['switch_count']} switches")
    return 0


def read_roles(path) -> dict[str, np.ndarray]:
    """CSV whose first row gives each column's role (x, y, z or ignore)."""
    try:
        raw = pd.read_csv(path, header=None, dtype=str)
    except FileNotFoundError as exc:
        raise ArtifactError("estimate input not found", path) from exc
    if raw.shape[0] < 2:
        raise ConfigError(f"{path}: needs a role row and at least one data row")
    roles = [str(r).strip().lower() for r in raw.iloc[0]]
    bad = [r for r in roles if r not in ROLES]
    if bad:
        raise ConfigError(f"{path}: unknown roles {bad}; expected {list(ROLES)}")
    body = raw.iloc[1:].apply(pd.to_numeric, errors="coerce")
    if body.isna().any().any():
        raise ConfigError(f"{path}: non-numeric value in data rows")
    groups = {}
    for role in ("x", "y", "z"):
        cols = [i for i, r in enumerate(roles) if r == role]
        if cols:
            groups[role] = body.iloc[:, cols].to_numpy(dtype=np.float64)
    if "x" not in groups or "y" not in groups:
        raise ConfigError(f"{path}: needs at least one x and one y column")
    return groups


def cmd_estimate(cfg: RunConfig) -> int:
    if cfg.estimate_input is None:
        raise ConfigError("estimate needs an input CSV")
    groups = read_roles(cfg.estimate_input)
    x, y, z = groups["x"], groups["y"], groups.get("z")
    est = cfg.analysis.estimator
    results = []
    for name in cfg.estimators:
        if name == "gcmi":
            result = gcmi(x, y, bias_correct=est.bias_correct)
        elif name == "conditional_gcmi":
            if z is None:
                raise ConfigError("conditional_gcmi needs at least one z column")
            result = conditional_gcmi(x, y, z, bias_correct=est.bias_correct)
        elif name == "binning":
            result = binning_mi(x, y, BinningConfig(bins_per_dim=est.bins))
        elif name == "plugin":
            result = plugin_discrete_mi(x, y)
        else:
            if y.shape[1] != 1:
                raise ConfigError("kde needs exactly one y (label) column")
            result = kde_mi_label(
                y[:, 0], x, noise_variance=est.kde_noise_variance, relative_variance=est.kde_relative_variance,
                bound=est.kde_bound, max_samples=est.kde_max_samples, seed=cfg.seed,
            )
        results.append(result.to_dict())
        print(json.dumps(result.to_dict(), sort_keys=True))
    path = cfg.out_dir / "estimates.json"
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(results, indent=2, sort_keys=True))
    return 0


# ---- argument parsing ----

def _common(parser: argparse.ArgumentParser, suppress: bool):
    default = argparse.SUPPRESS if suppress else None
    parser.add_argument("--config", type=Path, default=default, help="JSON run configuration")
    parser.add_argument("--seed", type=int, default=default, help="global seed")
    parser.add_argument("--out", type=str, default=default, help="output directory")
    parser.add_argument("-v", "--verbose", action="store_true", default=default or False)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="splitib", description=__doc__.splitlines()[0])
    _common(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic throughput dataset")
    _common(p, suppress=True)
    p.add_argument("--n-windows", type=int)
    p.add_argument("--noise", type=float)
    p.add_argument("--shuffle-labels", action="store_true", default=None)
    p.add_argument("--dataset", type=str, help="dataset CSV path (default <out>/dataset.csv)")

    p = sub.add_parser("train", help="two-phase cascaded training and ordering check")
    _common(p, suppress=True)
    p.add_argument("--dataset", type=str)
    p.add_argument("--epochs", type=int)
    p.add_argument("--phase2-epochs", type=int)
    p.add_argument("--progress", action="store_true", default=None, help="show epoch progress bars")

    p = sub.add_parser("analyze", help="information plane, temporal curves and redundancy")
    _common(p, suppress=True)
    p.add_argument("--tau", type=int)

    p = sub.add_parser("simulate", help="split inference over a simulated link")
    _common(p, suppress=True)
    p.add_argument("--dataset", type=str)
    p.add_argument("--steps", type=int)
    p.add_argument("--mode", choices=SIM_MODES + ("all",), default="all")

    p = sub.add_parser("estimate", help="MI estimates for a CSV with a role row")
    _common(p, suppress=True)
    p.add_argument("input", type=str)
    p.add_argument("--estimator", action="append", dest="estimators", help="repeatable; default gcmi")
    return parser


def _overrides(args: argparse.Namespace) -> dict:
    o: dict = {}
    if args.seed is not None:
        o["seed"] = args.seed
    if args.out is not None:
        o["out"] = args.out
    if getattr(args, "dataset", None) is not None:
        o["dataset"] = args.dataset
    synth = {k: v for k, v in (("n_windows", getattr(args, "n_windows", None)),
                               ("noise", getattr(args, "noise", None)),
                               ("shuffle_labels", getattr(args, "shuffle_labels", None))) if v is not None}
    if synth:
        o["synth"] = synth
    cascade = {k: v for k, v in (("epochs", getattr(args, "epochs", None)),
                                 ("phase2_epochs", getattr(args, "phase2_epochs", None)),
                                 ("progress", getattr(args, "progress", None))) if v is not None}
    if cascade:
        o["cascade"] = cascade
    if getattr(args, "tau", None) is not None:
        o["analysis"] = {"tau": args.tau}
    if getattr(args, "steps", None) is not None:
        o["simulation"] = {"steps": args.steps}
    if getattr(args, "input", None) is not None:
        o["estimate_input"] = args.input
    if getattr(args, "estimators", None):
        o["estimators"] = args.estimators
    return o


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO if args.command == "train" else logging.WARNING,
        stream=sys.stderr,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    try:
        cfg = load_run_config(args.config, _overrides(args))
        cfg.write(cfg.out_dir, args.command)
        if args.command == "synth":
            return cmd_synth(cfg)
        if args.command == "train":
            return cmd_train(cfg)
        if args.command == "analyze":
            return cmd_analyze(cfg)
        if args.command == "simulate":
            modes = SIM_MODES if args.mode == "all" else (args.mode,)
            return cmd_simulate(cfg, modes)
        return cmd_estimate(cfg)
    except SplitIBError as exc:
        logger.error("%s", exc)
        return exc.exit_code
    except (ValueError, FloatingPointError) as exc:
        # numeric failures outside the hierarchy, e.g. a non-finite estimate
        logger.error("%s: %s", type(exc).__name__, exc)
        return 1


if __name__ == "__main__":
    sys.exit(main())
