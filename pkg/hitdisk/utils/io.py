# io.py
# CSV and JSON emit/parse for density profiles and reports

import json
from pathlib import Path
from typing import Any, Dict, Optional, TextIO, Union

import numpy as np
import pandas as pd

from hitdisk.utils.errors import ParameterError

FLOAT_FORMAT = "%.17g"
FORMATS = ("csv", "json")


def profile_to_csv(frame: pd.DataFrame, target: Union[str, Path, TextIO]) -> None:
    """Header row, comma separated, 17 significant digits"""
    frame.to_csv(target, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")


def profile_from_csv(source: Union[str, Path, TextIO]) -> pd.DataFrame:
    frame = pd.read_csv(source, float_precision="round_trip")
    missing = {"alpha", "density"} - set(frame.columns)
    if missing:
        raise ParameterError(f"profile CSV lacks columns: {', '.join(sorted(missing))}")
    return frame


def _jsonable(value: Any) -> Any:
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, np.generic):
        return value.item()
    raise TypeError(f"{type(value).__name__} is not JSON serializable")


def to_json_text(payload: Dict[str, Any]) -> str:
    return json.dumps(payload, indent=2, default=_jsonable)


def emit(payload: Union[pd.DataFrame, Dict[str, Any]], fmt: str, output: Optional[Union[str, Path]],
         stream: TextIO) -> None:
    """Write a frame (csv) or a dict (json) to output, or to stream when output is None"""
    if fmt not in FORMATS:
        raise ParameterError(f"unknown format '{fmt}' (expected csv or json)")
    if output is not None:
        Path(output).parent.mkdir(parents=True, exist_ok=True)
    if fmt == "csv":
        if not isinstance(payload, pd.DataFrame):
            raise ParameterError("csv output needs tabular data")
        if output is None:
            profile_to_csv(payload, stream)
        else:
            profile_to_csv(payload, output)
        return
    text = to_json_text(payload if isinstance(payload, dict) else {"rows": payload.to_dict(orient="list")})
    if output is None:
        stream.write(text + "\n")
    else:
        Path(output).write_text(text + "\n", encoding="utf-8")
