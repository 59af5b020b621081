from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np
import pandas as pd
import pytest

from tailmix.distributions import BulkKind, MixtureSpec
from tailmix.likelihood import ComponentFit, ProfileRow, ThresholdProfile
from tailmix.outputs import (
    BAND_COLUMNS,
    PROFILE_COLUMNS,
    band_frame,
    read_trace,
    to_jsonable,
    write_band,
    write_json,
    write_profile,
    write_trace,
)
from tailmix.posterior import SurvivalBand
from tailmix.sampler import TRACE_COLUMNS, Trace


def _band(size: int, value: float) -> SurvivalBand:
    x = np.arange(1, size + 1)
    filled = np.full(size, value)
    return SurvivalBand(x=x, empirical=filled, lower=filled, median=filled, upper=filled, level=0.99)


def _profile(constrained: bool, us: list[int]) -> ThresholdProfile:
    spec = MixtureSpec(BulkKind.GEOMETRIC, constrained)
    rows = []
    for u in us:
        fit = ComponentFit(
            spec=spec,
            u=u,
            xi1=1.0,
            xi2=0.2,
            sigma=1.5,
            phi_u=0.1,
            loglik=-100.0 - u,
            n_bulk=90,
            n_tail=10,
            flags=("single_unique_exceedance", "xi2_extreme") if u == us[0] else (),
        )
        rows.append(ProfileRow(u=u, loglik=fit.loglik, fit=fit))
    return ThresholdProfile(spec=spec, rows=tuple(rows))


def test_trace_csv_keeps_columns_and_values(tmp_path: Path) -> None:
    trace = Trace.from_rows(
        [
            (100, 1, 1.25, 0.3, 2.0, 15, 0.0712345678901234, -1234.5),
            (200, 0, 1.5, -0.1, 1.75, 14, 0.08, -1230.25),
        ]
    )
    path = write_trace(trace, tmp_path / "run" / "trace.csv")
    header = path.read_text(encoding="utf-8").splitlines()[0]
    assert header.split(",") == list(TRACE_COLUMNS)

    loaded = read_trace(path)
    assert loaded.iteration.tolist() == [100, 200]
    assert loaded.model.tolist() == [1, 0]
    assert loaded.u.tolist() == [15, 14]
    np.testing.assert_allclose(loaded.phi_u, trace.phi_u, rtol=1e-14)
    np.testing.assert_allclose(loaded.log_post, trace.log_post, rtol=1e-14)


def test_read_trace_rejects_missing_columns(tmp_path: Path) -> None:
    path = tmp_path / "trace.csv"
    pd.DataFrame({"iter": [1], "M": [0]}).to_csv(path, index=False)
    with pytest.raises(ValueError, match="missing columns"):
        read_trace(path)


def test_band_file_puts_constrained_block_first(tmp_path: Path) -> None:
    frame = band_frame({0: _band(3, 0.5), 1: _band(2, 0.25)})
    assert list(frame.columns) == list(BAND_COLUMNS)
    assert frame["M"].tolist() == [1, 1, 0, 0, 0]
    assert frame["x"].tolist() == [1, 2, 1, 2, 3]

    path = write_band({0: _band(3, 0.5)}, tmp_path / "band.csv")
    assert pd.read_csv(path)["med"].tolist() == [0.5, 0.5, 0.5]
    assert list(band_frame({}).columns) == list(BAND_COLUMNS)


def test_profile_file_lists_each_model(tmp_path: Path) -> None:
    path = write_profile(
        [_profile(False, [4, 2, 3]), _profile(True, [2, 3])], tmp_path / "profile.csv"
    )
    frame = pd.read_csv(path, keep_default_na=False)
    assert list(frame.columns) == list(PROFILE_COLUMNS)
    assert frame["M"].tolist() == [0, 0, 0, 1, 1]
    assert frame["u"].tolist() == [2, 3, 4, 2, 3]
    flagged = "single_unique_exceedance;xi2_extreme"
    assert frame["flags"].tolist() == ["", "", flagged, flagged, ""]


def test_json_output_replaces_non_finite_numbers(tmp_path: Path) -> None:
    payload = {
        "value": np.float64(1.5),
        "count": np.int64(3),
        "missing": math.nan,
        "unbounded": math.inf,
        "grid": np.array([1.0, np.nan]),
        "nested": {1: (np.int64(2), "text")},
    }
    assert to_jsonable(payload) == {
        "value": 1.5,
        "count": 3,
        "missing": None,
        "unbounded": None,
        "grid": [1.0, None],
        "nested": {"1": [2, "text"]},
    }
    path = write_json(payload, tmp_path / "deep" / "summary.json")
    assert json.loads(path.read_text(encoding="utf-8"))["count"] == 3
