"""Read the artifacts of a run directory for the dashboard.

Every loader returns None when its file is missing, so the dashboard can show
whatever part of the pipeline has run so far.
"""
from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

import pandas as pd

from utils.errors import ArtifactError

logger = logging.getLogger(__name__)

SIM_RUNS = ("adaptive", "informative", "compressed")


def _json(path: Path):
    if not path.exists():
        return None
    try:
        return json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ArtifactError(f"unreadable JSON ({exc})", path) from exc


def _csv(path: Path, **kwargs) -> pd.DataFrame | None:
    if not path.exists():
        return None
    df = pd.read_csv(path, **kwargs)
    df.columns = df.columns.str.strip()
    return df


def history_frame(history: dict | None) -> pd.DataFrame:
    """Per-epoch loss and accuracy of both phases as one long frame."""
    rows = []
    for phase, entries in (history or {}).items():
        for entry in entries:
            rows.append({"phase": phase, **entry})
    return pd.DataFrame(rows, columns=["phase", "epoch", "loss", "accuracy"])


@dataclass
class RunArtifacts:
    root: Path
    history: dict | None = None
    ordering: dict | None = None
    plane: pd.DataFrame | None = None
    temporal_y: pd.DataFrame | None = None
    temporal_x: pd.DataFrame | None = None
    redundancy: dict | None = None
    summary: dict | None = None
    traces: dict = field(default_factory=dict)      # name -> rows
    sim_summaries: dict = field(default_factory=dict)

    @property
    def empty(self) -> bool:
        return self.history is None and self.plane is None and not self.traces


def load_run(root) -> RunArtifacts:
    root = Path(root)
    if not root.is_dir():
        raise ArtifactError("run directory not found", root)
    analysis = root / "analysis"
    run = RunArtifacts(
        root=root,
        history=_json(root / "history.json"),
        ordering=_json(root / "ordering_report.json"),
        plane=_csv(analysis / "plane.csv"),
        temporal_y=_csv(analysis / "temporal_y.csv"),
        temporal_x=_csv(analysis / "temporal_x.csv"),
        redundancy=_json(analysis / "redundancy.json"),
        summary=_json(analysis / "summary.json"),
    )
    for name in SIM_RUNS:
        rows = _csv(root / "sim" / f"{name}.csv", dtype={"correct": str})
        if rows is not None:
            run.traces[name] = rows
            run.sim_summaries[name] = _json(root / "sim" / f"{name}.json")
    logger.debug("loaded run %s: %d traces", root, len(run.traces))
    return run
