"""
File formats: anchor CSV ("x,y" per row, '#' comments) and JSON reports
Floats are written with 17 significant digits so files re-read bit-exactly
"""
import json
import logging
import math
import sys
from pathlib import Path
from typing import Any, Optional

import numpy as np
import pandas as pd
from pydantic import BaseModel

from app.config.settings import get_settings
from app.models.schemas import AnchorSet, Provenance

logger = logging.getLogger(__name__)


def read_anchors_csv(path: str, R: Optional[float] = None) -> AnchorSet:
    """
    Load anchors; a leading "x,y" header is optional. Duplicates within tau = 1e-9 * R are dropped
    (exact duplicates only when R is unknown), keeping the first occurrence.
    """
    try:
        frame = pd.read_csv(path, comment="#", header=None, dtype=str, skipinitialspace=True)
    except pd.errors.EmptyDataError:
        logger.warning(f"⚠️ Anchor file {path} holds no points")
        return AnchorSet(points=[], provenance=Provenance.FILE)

    if frame.shape[1] != 2:
        raise ValueError(f"{path}: expected 2 columns (x,y), found {frame.shape[1]}")
    if frame.iloc[0].str.strip().str.lower().tolist() == ["x", "y"]:
        frame = frame.iloc[1:]
    coords = frame.astype(float).to_numpy().reshape(-1, 2)
    if not np.all(np.isfinite(coords)):
        raise ValueError(f"{path}: non-finite coordinates")

    merge_tol = get_settings().tolerance_factor * R if R else 0.0
    anchors = AnchorSet.from_array(coords, provenance=Provenance.FILE, merge_tol=merge_tol)
    if len(anchors) < len(coords):
        logger.warning(f"⚠️ Dropped {len(coords) - len(anchors)} duplicate anchors from {path}")
    logger.info(f"✅ Loaded {len(anchors)} anchors from {path}")
    return anchors


def write_anchors_csv(anchors: AnchorSet, path: str) -> Path:
    out = Path(path)
    frame = pd.DataFrame(anchors.as_array(), columns=["x", "y"])
    with open(out, "w", encoding="utf-8", newline="") as fh:
        fh.write(f"# provenance: {anchors.provenance.value}\n")
        frame.to_csv(fh, index=False, float_format="%.17g")
    logger.info(f"✅ Wrote {len(anchors)} anchors to {out}")
    return out


def jsonable(value: Any) -> Any:
    """Plain JSON types; non-finite floats become null"""
    if isinstance(value, BaseModel):
        return jsonable(value.model_dump(mode="python"))
    if isinstance(value, dict):
        return {str(k): jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return jsonable(value.tolist())
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else None
    if hasattr(value, "value") and isinstance(getattr(value, "value"), str):
        return value.value
    return value


def write_json(payload: Any, out_path: Optional[str] = None) -> None:
    """Report to stdout, or to out_path when given. float repr is the shortest string that round-trips."""
    text = json.dumps(jsonable(payload), indent=2, allow_nan=False)
    if out_path:
        Path(out_path).write_text(text + "\n", encoding="utf-8")
        logger.info(f"✅ Report written to {out_path}")
    else:
        sys.stdout.write(text + "\n")
        sys.stdout.flush()
