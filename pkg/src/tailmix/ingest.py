"""Readers and writers for the three supported sample formats.

``freq-csv``  header ``x,count`` then one ``value,count`` row per value.
              Quoted headers and CRLF line ends are accepted.
``raw``       one nonnegative integer per line; blank lines ignored.
``edges``     ``source target`` per line, whitespace separated; ``#``
              starts a comment. The sample is the in-degree of every
              node seen.
"""

from __future__ import annotations

from collections.abc import Callable
from pathlib import Path
import re

import pandas as pd

from tailmix.likelihood import FrequencyTable

FREQUENCY_HEADER: tuple[str, ...] = ("x", "count")
_PARSER_LINE = re.compile(r"line (\d+)")


class DataFormatError(ValueError):
    """Raised when an input file cannot be parsed; names the file and line."""

    def __init__(self, path: Path, line_number: int, message: str) -> None:
        self.path = Path(path)
        self.line_number = line_number
        super().__init__(f"{self.path}:{line_number}: {message}")


def _read_frame(path: Path, **options: object) -> pd.DataFrame:
    """``pd.read_csv`` with every cell as stripped text; tokenizer errors keep their line."""
    try:
        frame = pd.read_csv(path, dtype=str, encoding="utf-8-sig", **options)
    except pd.errors.EmptyDataError:
        return pd.DataFrame()
    except pd.errors.ParserError as exc:
        match = _PARSER_LINE.search(str(exc))
        line_number = int(match.group(1)) if match else 1
        detail = str(exc).strip().splitlines()[-1]
        raise DataFormatError(path, line_number, detail) from None
    for column in frame.columns:
        frame[column] = frame[column].str.strip()
    return frame


def _parse_count(path: Path, line_number: int, token: object, what: str) -> int:
    if pd.isna(token) or token == "":
        raise DataFormatError(path, line_number, f"missing {what}.")
    try:
        value = int(str(token))
    except ValueError:
        raise DataFormatError(path, line_number, f"{what} {token!r} is not an integer.") from None
    if value < 0:
        raise DataFormatError(path, line_number, f"{what} {value} is negative.")
    return value


def _drop_blank_rows(frame: pd.DataFrame) -> pd.DataFrame:
    return frame.replace("", pd.NA).dropna(how="all")


def ingest_frequency_csv(path: Path) -> FrequencyTable:
    # blank rows stay in the frame so index + 2 is the file line
    frame = _read_frame(path, skip_blank_lines=False)
    header = tuple(str(name).strip().lower() for name in frame.columns)
    if header != FREQUENCY_HEADER:
        raise DataFormatError(path, 1, "expected header 'x,count'.")
    counts: dict[int, int] = {}
    for index, row in _drop_blank_rows(frame).iterrows():
        line_number = int(index) + 2
        value = _parse_count(path, line_number, row.iloc[0], "value")
        count = _parse_count(path, line_number, row.iloc[1], "count")
        counts[value] = counts.get(value, 0) + count
    return FrequencyTable.from_counts(counts)


def ingest_raw(path: Path) -> FrequencyTable:
    frame = _read_frame(path, header=None, names=["value"], skip_blank_lines=False)
    if frame.empty:
        return FrequencyTable.from_counts({})
    values = [
        _parse_count(path, int(index) + 1, token, "value")
        for index, token in _drop_blank_rows(frame)["value"].items()
    ]
    counts = pd.Series(values, dtype="int64").value_counts()
    return FrequencyTable.from_counts({int(value): int(count) for value, count in counts.items()})


def _content_line_numbers(path: Path) -> list[int]:
    text = Path(path).read_text(encoding="utf-8-sig")
    return [
        number
        for number, line in enumerate(text.splitlines(), start=1)
        if line.strip() and not line.lstrip().startswith("#")
    ]


def ingest_edge_list(path: Path) -> FrequencyTable:
    frame = _read_frame(path, sep=r"\s+", comment="#", header=None)
    if frame.empty:
        return FrequencyTable.from_counts({})
    if frame.shape[1] != 2 or frame.iloc[:, 1].isna().any():
        lines = _content_line_numbers(path)
        if frame.shape[1] != 2:
            bad, found = 0, frame.shape[1]
        else:
            bad = int(frame.iloc[:, 1].isna().to_numpy().argmax())
            found = 1
        line_number = lines[bad] if bad < len(lines) else bad + 1
        raise DataFormatError(
            path, line_number, f"expected 'source target', got {found} tokens."
        )
    frame.columns = ["source", "target"]
    nodes = pd.unique(pd.concat([frame["source"], frame["target"]], ignore_index=True))
    in_degree = frame["target"].value_counts().reindex(nodes, fill_value=0)
    degrees = in_degree.value_counts()
    return FrequencyTable.from_counts({int(degree): int(count) for degree, count in degrees.items()})


INGESTERS: dict[str, Callable[[Path], FrequencyTable]] = {
    "freq-csv": ingest_frequency_csv,
    "raw": ingest_raw,
    "edges": ingest_edge_list,
}


def ingest(path: Path, data_format: str) -> FrequencyTable:
    try:
        reader = INGESTERS[data_format]
    except KeyError:
        raise ValueError(
            f"Unknown data format {data_format!r}; expected one of {sorted(INGESTERS)}."
        ) from None
    return reader(Path(path))


# ---------------------------------------------------------------------------
# writers


def frequency_csv_text(table: FrequencyTable) -> str:
    rows = ["x,count"]
    if table.zero_count:
        rows.append(f"0,{table.zero_count}")
    rows.extend(f"{value},{count}" for value, count in table.entries)
    return "\n".join(rows) + "\n"


def write_frequency_csv(table: FrequencyTable, path: Path) -> Path:
    path = Path(path)
    path.write_text(frequency_csv_text(table), encoding="utf-8")
    return path


def write_raw(table: FrequencyTable, path: Path) -> Path:
    rows = ["0"] * table.zero_count
    for value, count in table.entries:
        rows.extend([str(value)] * count)
    path = Path(path)
    path.write_text("\n".join(rows) + "\n", encoding="utf-8")
    return path


def write_edge_list(table: FrequencyTable, path: Path) -> Path:
    """Write a graph whose in-degree table equals ``table``.

    Zero in-degree nodes appear only as sources, so each needs at least one
    edge: zero_count may not exceed the total in-degree. Remaining edges
    are self-loops.
    """
    total_edges = sum(value * count for value, count in table.entries)
    if table.zero_count > total_edges:
        raise ValueError(
            f"Cannot express {table.zero_count} zero in-degree nodes with "
            f"{total_edges} edges."
        )
    rows = ["# source target"]
    edge_index = 0
    node_index = 0
    for value, count in table.entries:
        for _ in range(count):
            target = f"n{node_index}"
            node_index += 1
            for _ in range(value):
                source = f"z{edge_index}" if edge_index < table.zero_count else target
                rows.append(f"{source} {target}")
                edge_index += 1
    path = Path(path)
    path.write_text("\n".join(rows) + "\n", encoding="utf-8")
    return path
