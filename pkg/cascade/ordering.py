"""Check that the compressed path is no better than the informative one."""
from __future__ import annotations

import json
import logging
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from cascade.config import Mode
from cascade.model import CascadeModel
from estimators.base import EstimatorConfig
from estimators.gcmi import gcmi
from estimators.kde import kde_mi_label
from estimators.projection import guard_pair
from utils.errors import ArtifactError, ContractError
from utils.load_data import WindowDataset

logger = logging.getLogger(__name__)


@dataclass
class ModeResult:
    mode: str
    accuracy: float
    i_xz_bits: float
    i_y_out_bits: float
    payload_dim: int


@dataclass
class OrderingReport:
    modes: list[ModeResult]
    passed: bool
    checks: dict
    slack_accuracy: float
    slack_bits: float
    min_gap: float
    n_samples: int
    flags: dict = field(default_factory=dict)

    def mode(self, mode) -> ModeResult:
        name = Mode.parse(mode).value
        return next(m for m in self.modes if m.mode == name)

    def to_dict(self) -> dict:
        return {
            "pass": self.passed,
            "modes": [asdict(m) for m in self.modes],
            "checks": self.checks,
            "slack_accuracy": self.slack_accuracy,
            "slack_bits": self.slack_bits,
            "min_gap": self.min_gap,
            "n_samples": self.n_samples,
            "flags": self.flags,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "OrderingReport":
        return cls(
            modes=[ModeResult(**m) for m in d["modes"]],
            passed=bool(d["pass"]),
            checks=d["checks"],
            slack_accuracy=d["slack_accuracy"],
            slack_bits=d["slack_bits"],
            min_gap=d["min_gap"],
            n_samples=d["n_samples"],
            flags=d.get("flags", {}),
        )

    def write(self, path) -> Path:
        path = Path(path)
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True))
        except OSError as exc:
            raise ArtifactError(f"could not write ordering report ({exc})", path) from exc
        return path


def verify_ordering(
    model: CascadeModel,
    val_data: WindowDataset,
    estimator_cfg: EstimatorConfig | None = None,
) -> OrderingReport:
    """Accuracy and MI per mode; failing the ordering is a reported outcome, not an exception."""
    if not model.phase1_trained:
        raise ContractError("verify_ordering needs a model whose phase 1 has been trained")
    if not model.augmented:
        raise ContractError("verify_ordering needs an augmented model")
    if val_data.labels is None or len(val_data) < 2:
        raise ContractError("verify_ordering needs at least 2 labelled validation windows")
    est = estimator_cfg or EstimatorConfig()
    cfg = model.config
    x, y = val_data.inputs, val_data.labels
    n = x.shape[0]

    flags: dict = {}
    results = []
    for mode in (Mode.INFORMATIVE, Mode.COMPRESSED):
        code = model.encode(x, mode)
        probs = model.decode(code, mode)
        accuracy = float(np.mean(probs.argmax(axis=-1) == y))
        x_repr, code_repr, guard = guard_pair(x.reshape(n, -1), code, est.max_dim_ratio)
        if guard:
            flags[mode.value] = guard
        i_xz = gcmi(x_repr, code_repr, bias_correct=est.bias_correct)
        i_y = kde_mi_label(
            y.reshape(-1), probs.reshape(-1, probs.shape[-1]),
            noise_variance=est.kde_noise_variance, relative_variance=est.kde_relative_variance,
            bound=est.kde_bound, max_samples=est.kde_max_samples, seed=cfg.seed,
        )
        results.append(ModeResult(mode.value, accuracy, i_xz.bits, i_y.bits, model.payload_dim(mode)))

    info, comp = results
    checks = {
        "accuracy_ordering": comp.accuracy <= info.accuracy + cfg.slack_accuracy,
        "complexity_ordering": comp.i_xz_bits <= info.i_xz_bits + cfg.slack_bits,
        "min_gap": cfg.min_gap <= 0 or info.accuracy - comp.accuracy >= cfg.min_gap,
        # both directions are reported, neither gates the result
        "i_y_compressed_le_informative": comp.i_y_out_bits <= info.i_y_out_bits,
        "i_y_informative_le_compressed": info.i_y_out_bits <= comp.i_y_out_bits,
    }
    passed = checks["accuracy_ordering"] and checks["complexity_ordering"] and checks["min_gap"]
    report = OrderingReport(
        modes=results, passed=bool(passed), checks={k: bool(v) for k, v in checks.items()},
        slack_accuracy=cfg.slack_accuracy, slack_bits=cfg.slack_bits, min_gap=cfg.min_gap,
        n_samples=n, flags=flags,
    )
    log = logger.info if passed else logger.warning
    log("ordering %s: accuracy %.3f / %.3f, I(X;z) %.2f / %.2f bits",
        "passed" if passed else "failed", info.accuracy, comp.accuracy, info.i_xz_bits, comp.i_xz_bits)
    return report
