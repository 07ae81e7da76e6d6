"""Rendering of tables, scalar values and experiment reports.

csv and markdown print fixed decimals ('.' separator, no grouping); json
prints raw doubles, whose repr parses back to the identical value.
"""
import io
import json
import math
from enum import Enum
from typing import Any, List, Mapping

import numpy as np
import pandas as pd


class OutputFormat(str, Enum):
    CSV = "csv"
    MARKDOWN = "markdown"
    JSON = "json"


def _plain(x: Any) -> Any:
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.floating):
        return float(x)
    if isinstance(x, np.ndarray):
        return [_plain(v) for v in x.tolist()]
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    if isinstance(x, Enum):
        return x.value
    return x


def format_number(x: Any, decimals: int) -> str:
    if x is None or (isinstance(x, (float, np.floating)) and math.isnan(x)):
        return ""
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.{decimals}f}"
    return str(x)


def _formatted_frame(df: pd.DataFrame, decimals: int) -> pd.DataFrame:
    return df.apply(lambda col: col.map(lambda v: format_number(v, decimals)))


def _markdown(df: pd.DataFrame) -> str:
    header = [str(c) for c in df.columns]
    lines = [
        "| " + " | ".join(header) + " |",
        "|" + "|".join("---:" for _ in header) + "|",
    ]
    for row in df.itertuples(index=False):
        lines.append("| " + " | ".join(str(v) for v in row) + " |")
    return "\n".join(lines) + "\n"


def render_table(df: pd.DataFrame, fmt: OutputFormat, decimals: int) -> str:
    fmt = OutputFormat(fmt)
    if fmt is OutputFormat.JSON:
        records = [{str(k): _plain(v) for k, v in rec.items()} for rec in df.to_dict(orient="records")]
        return json.dumps(records, indent=2) + "\n"
    text = _formatted_frame(df, decimals)
    if fmt is OutputFormat.MARKDOWN:
        return _markdown(text)
    buf = io.StringIO()
    text.to_csv(buf, index=False, lineterminator="\n")
    return buf.getvalue()


def render_value(name: str, value: float, fmt: OutputFormat, decimals: int = 8) -> str:
    fmt = OutputFormat(fmt)
    if fmt is OutputFormat.JSON:
        return json.dumps({"formula": name, "value": _plain(value)}) + "\n"
    if isinstance(value, (list, tuple, np.ndarray)):
        return " ".join(format_number(v, decimals) for v in value) + "\n"
    return format_number(value, decimals) + "\n"


def render_records(records: List[Mapping[str, Any]], fmt: OutputFormat, decimals: int = 8) -> str:
    """Flat mappings (experiment reports, filter info) as one row each."""
    fmt = OutputFormat(fmt)
    if fmt is OutputFormat.JSON:
        plain = [{k: _plain(v) for k, v in rec.items()} for rec in records]
        return json.dumps(plain if len(plain) != 1 else plain[0], indent=2) + "\n"
    return render_table(pd.DataFrame([dict(r) for r in records]), fmt, decimals)

