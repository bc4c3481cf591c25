"""Curve files, the analysis summary and a standalone plotting script."""
from __future__ import annotations

import json
import logging
import math
from pathlib import Path

import numpy as np
import pandas as pd
from scipy import stats

from infoplane.plane import InfoPlanePoint
from infoplane.redundancy import RedundancyReport
from infoplane.temporal import TemporalCurvePoint
from utils.errors import ArtifactError, ConfigError

logger = logging.getLogger(__name__)

COLUMNS = ["kind", "phase", "epoch", "layer", "t", "i_xh_bits", "i_yh_bits", "value_bits"]
INT_COLUMNS = ["phase", "epoch", "layer", "t"]
FLOAT_COLUMNS = ["i_xh_bits", "i_yh_bits", "value_bits"]


def _row(point) -> dict:
    if isinstance(point, InfoPlanePoint):
        return {"kind": "plane", "phase": point.phase, "epoch": point.epoch, "layer": point.layer, "t": None,
                "i_xh_bits": point.i_xh_bits, "i_yh_bits": point.i_yh_bits, "value_bits": None}
    if isinstance(point, TemporalCurvePoint):
        return {"kind": point.kind, "phase": point.phase, "epoch": point.epoch, "layer": point.layer,
                "t": point.t, "i_xh_bits": None, "i_yh_bits": None, "value_bits": point.value_bits}
    raise TypeError(f"cannot export {type(point).__name__}")


def _point(row: dict):
    if row["kind"] == "plane":
        return InfoPlanePoint(int(row["phase"]), int(row["epoch"]), int(row["layer"]),
                              float(row["i_xh_bits"]), float(row["i_yh_bits"]))
    return TemporalCurvePoint(row["kind"], int(row["epoch"]), int(row["t"]), float(row["value_bits"]),
                              int(row["phase"]), int(row["layer"]))


def to_frame(points) -> pd.DataFrame:
    df = pd.DataFrame([_row(p) for p in points], columns=COLUMNS)
    for col in INT_COLUMNS:
        df[col] = df[col].astype("Int64")
    for col in FLOAT_COLUMNS:
        df[col] = df[col].astype("float64")
    return df


def export_curves(points, path, format: str = "csv") -> Path:
    """CSV (empty cells where a field does not apply) or a JSON array."""
    path = Path(path)
    if format not in ("csv", "json"):
        raise ConfigError(f"format must be 'csv' or 'json', got {format!r}")
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        if format == "csv":
            to_frame(points).to_csv(path, index=False)
        else:
            path.write_text(json.dumps([_row(p) for p in points], indent=2))
    except OSError as exc:
        raise ArtifactError(f"could not write curves ({exc})", path) from exc
    logger.debug("wrote %d curve points to %s", len(points), path)
    return path


def read_curves(path) -> list:
    path = Path(path)
    try:
        if path.suffix == ".json":
            rows = json.loads(path.read_text())
        else:
            df = pd.read_csv(path, float_precision="round_trip", dtype={"kind": str})
            df = df.astype(object).where(df.notna(), None)
            rows = df.to_dict(orient="records")
    except FileNotFoundError as exc:
        raise ArtifactError("curve file not found", path) from exc
    except (OSError, ValueError) as exc:
        raise ArtifactError(f"unreadable curve file ({exc})", path) from exc
    return [_point(r) for r in rows]


# ---- summary ----

def analysis_summary(
    plane: list[InfoPlanePoint],
    info_curve: list[TemporalCurvePoint],
    compression_curve: list[TemporalCurvePoint],
    redundancy: RedundancyReport | None,
    monotone_tolerance: float = 0.1,
) -> dict:
    """Observations over the curves; reported, never enforced."""
    summary: dict = {}

    if info_curve:
        last = max(p.epoch for p in info_curve)
        final = sorted((p for p in info_curve if p.epoch == last), key=lambda p: p.t)
        values = [p.value_bits for p in final]
        rho = stats.spearmanr([p.t for p in final], values)[0] if len(set(values)) > 1 else float("nan")
        summary["temporal_info"] = {
            "epoch": last,
            "spearman_t": None if math.isnan(rho) else float(rho),
            "last_step_is_max": bool(values[-1] >= max(values) - monotone_tolerance),
        }

    if compression_curve:
        epochs = sorted({p.epoch for p in compression_curve})
        first, last = epochs[0], epochs[-1]
        early = {p.t: p.value_bits for p in compression_curve if p.epoch == first}
        late = {p.t: p.value_bits for p in compression_curve if p.epoch == last}
        common = sorted(set(early) & set(late))
        gap = math.fsum(early[t] - late[t] for t in common) / len(common) if common else float("nan")
        summary["temporal_compression"] = {
            "early_epoch": first, "final_epoch": last,
            "mean_early_minus_final": gap, "compressed": bool(gap > 0),
        }

    if redundancy is not None:
        diffs = np.diff(redundancy.values)
        summary["redundancy"] = {
            "values": redundancy.values,
            "k_star": redundancy.k_star,
            "projected_dims": redundancy.flags.get("projected_dims"),
            "nonincreasing_within_tolerance": bool(np.all(diffs <= monotone_tolerance)),
        }

    if plane:
        final_xh = {}
        for p in plane:
            key = p.layer
            if key not in final_xh or p.epoch >= final_xh[key][0]:
                final_xh[key] = (p.epoch, p.i_xh_bits)
        layers = sorted(final_xh)
        series = [final_xh[k][1] for k in layers]
        fitting = {}
        for layer in layers:
            pts = sorted((p for p in plane if p.layer == layer), key=lambda p: p.epoch)
            fitting[str(layer)] = pts[-1].i_yh_bits - pts[0].i_yh_bits
        summary["plane"] = {
            "final_i_xh_by_layer": {str(k): v for k, v in zip(layers, series)},
            "i_xh_decreases_with_depth": bool(all(a > b for a, b in zip(series, series[1:]))),
            "i_yh_gain_by_layer": fitting,
        }
    return summary


def write_summary(summary: dict, path) -> Path:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(summary, indent=2, sort_keys=True))
    except OSError as exc:
        raise ArtifactError(f"could not write summary ({exc})", path) from exc
    return path


# ---- plotting script ----

PLOT_SCRIPT = '''"""Plots the exported information curves. Usage: python {name} [analysis_dir]"""
import sys
from pathlib import Path

import matplotlib.pyplot as plt
import numpy as np
import pandas as pd

root = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(__file__).parent

plane = pd.read_csv(root / "{plane}")
fig, ax = plt.subplots(figsize=(6, 5))
for (phase, layer), grp in plane.groupby(["phase", "layer"]):
    grp = grp.sort_values("epoch")
    ax.plot(grp["i_xh_bits"], grp["i_yh_bits"], "-", alpha=0.4)
    ax.scatter(grp["i_xh_bits"], grp["i_yh_bits"], c=grp["epoch"], cmap="viridis", label=f"phase {{phase}} layer {{layer}}")
ax.set_xlabel("I(X;H) [bits]")
ax.set_ylabel("I(H;Y) [bits]")
ax.legend()
fig.savefig(root / "plane.png", dpi=150)

for name, column in (("{temporal_y}", "value_bits"), ("{temporal_x}", "value_bits")):
    curve = pd.read_csv(root / name)
    surface = curve.pivot_table(index="epoch", columns="t", values=column)
    fig = plt.figure(figsize=(7, 5))
    ax = fig.add_subplot(projection="3d")
    tt, ee = surface.columns.to_numpy(), surface.index.to_numpy()
    T, E = np.meshgrid(tt, ee)
    ax.plot_surface(T, E, surface.to_numpy(), cmap="viridis")
    ax.set_xlabel("timestep t")
    ax.set_ylabel("epoch")
    ax.set_zlabel("bits")
    fig.savefig(root / (Path(name).stem + ".png"), dpi=150)
'''


def write_plot_script(directory, plane="plane.csv", temporal_y="temporal_y.csv", temporal_x="temporal_x.csv") -> Path:
    path = Path(directory) / "plot_curves.py"
    text = PLOT_SCRIPT.format(name=path.name, plane=plane, temporal_y=temporal_y, temporal_x=temporal_x)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)
    except OSError as exc:
        raise ArtifactError(f"could not write plot script ({exc})", path) from exc
    return path
