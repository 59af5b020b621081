"""Result files: trace, bands, profile and JSON summaries."""

from __future__ import annotations

from collections.abc import Mapping, Sequence
import json
import math
from pathlib import Path
from typing import Any

import numpy as np
import pandas as pd

from tailmix.likelihood import ThresholdProfile
from tailmix.posterior import BaselineCurve, SurvivalBand
from tailmix.sampler import TRACE_COLUMNS, Trace

FLOAT_FORMAT = "%.15g"
BAND_COLUMNS: tuple[str, ...] = ("M", "x", "emp_surv", "lo", "med", "hi")
PROFILE_COLUMNS: tuple[str, ...] = (
    "M",
    "u",
    "loglik",
    "xi1",
    "xi2",
    "sigma",
    "phi_u",
    "n_bulk",
    "n_tail",
    "flags",
)


def _ensure_parent(path: Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    return path


def write_trace(trace: Trace, path: Path) -> Path:
    frame = pd.DataFrame(trace.columns(), columns=list(TRACE_COLUMNS))
    path = _ensure_parent(path)
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT)
    return path


def read_trace(path: Path) -> Trace:
    frame = pd.read_csv(path)
    missing = [name for name in TRACE_COLUMNS if name not in frame.columns]
    if missing:
        raise ValueError(f"{path}: trace file is missing columns {missing}.")
    return Trace.from_rows(frame[list(TRACE_COLUMNS)].to_numpy(dtype=float))


def band_frame(bands: Mapping[int, SurvivalBand]) -> pd.DataFrame:
    frames = [
        pd.DataFrame(
            {
                "M": np.full(band.x.size, model, dtype=np.int64),
                "x": band.x,
                "emp_surv": band.empirical,
                "lo": band.lower,
                "med": band.median,
                "hi": band.upper,
            }
        )
        for model, band in sorted(bands.items(), reverse=True)
    ]
    if not frames:
        return pd.DataFrame(columns=list(BAND_COLUMNS))
    return pd.concat(frames, ignore_index=True)


def write_band(bands: Mapping[int, SurvivalBand], path: Path) -> Path:
    """One block of rows per model indicator, constrained first."""
    path = _ensure_parent(path)
    band_frame(bands).to_csv(path, index=False, float_format=FLOAT_FORMAT)
    return path


def write_baseline(curve: BaselineCurve, path: Path) -> Path:
    frame = pd.DataFrame({"x": curve.x, "surv": curve.survival})
    path = _ensure_parent(path)
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT)
    return path


def profile_frame(profiles: Sequence[ThresholdProfile]) -> pd.DataFrame:
    rows = [
        {
            "M": profile.spec.model,
            "u": row.u,
            "loglik": row.loglik,
            "xi1": row.fit.xi1,
            "xi2": row.fit.xi2,
            "sigma": row.fit.sigma,
            "phi_u": row.fit.phi_u,
            "n_bulk": row.fit.n_bulk,
            "n_tail": row.fit.n_tail,
            "flags": ";".join(row.fit.flags),
        }
        for profile in profiles
        for row in sorted(profile.rows, key=lambda item: item.u)
    ]
    return pd.DataFrame(rows, columns=list(PROFILE_COLUMNS))


def write_profile(profiles: Sequence[ThresholdProfile], path: Path) -> Path:
    path = _ensure_parent(path)
    profile_frame(profiles).to_csv(path, index=False, float_format=FLOAT_FORMAT)
    return path


def to_jsonable(value: Any) -> Any:
    if isinstance(value, Mapping):
        return {str(key): to_jsonable(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(item) for item in value]
    if isinstance(value, np.ndarray):
        return [to_jsonable(item) for item in value.tolist()]
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, (float, np.floating)):
        number = float(value)
        # JSON has no inf/nan literals
        return number if math.isfinite(number) else None
    return value


def write_json(payload: Mapping[str, Any], path: Path) -> Path:
    path = _ensure_parent(path)
    path.write_text(json.dumps(to_jsonable(payload), indent=2) + "\n", encoding="utf-8")
    return path
