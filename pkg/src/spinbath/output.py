"""CSV output: "#key=value" metadata lines, one header row, floats at 17 significant digits."""
import logging
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import numpy as np

from . import __version__
from .schema import DecoherenceSeries

logger = logging.getLogger("spinbath")

SERIES_COLUMNS = ["t", "kappa_re", "kappa_im"]


def series_metadata(series: DecoherenceSeries) -> Dict[str, str]:
    spec = series.spec_echo
    schedule = series.schedule_echo
    return {
        "backend": series.provenance.value,
        "boundary": spec.boundary.value,
        "J": repr(spec.j_coupling),
        "model": spec.model.value,
        "N": str(spec.n_bath),
        "schedule": schedule.describe() if schedule is not None else "none",
        "V": repr(spec.v_coupling),
        "version": __version__,
    }


def write_table(path: Path,
                columns: List[str],
                data: np.ndarray,
                metadata: Optional[Dict[str, str]] = None) -> Path:
    """
    Write ``data`` (rows x len(columns)) as CSV. Metadata keys are written in sorted order
    and carry no timestamps, so identical inputs give identical bytes.
    """
    data = np.asarray(data, dtype=float)
    if data.ndim != 2 or data.shape[1] != len(columns):
        raise ValueError(f"data of shape {data.shape} does not match columns {columns}")
    meta = {"version": __version__, **(metadata or {})}
    header = "\n".join([f"#{key}={meta[key]}" for key in sorted(meta)] + [",".join(columns)])
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    np.savetxt(path, data, fmt="%.17g", delimiter=",", header=header, comments="", encoding="utf-8")
    logger.info(f"Wrote {path} ({data.shape[0]} rows)")
    return path


def write_series_csv(path: Path, series: DecoherenceSeries) -> Path:
    values = series.values
    data = np.column_stack([series.times, values.real, values.imag])
    return write_table(path, SERIES_COLUMNS, data, series_metadata(series))


def read_series_csv(path: Path) -> Tuple[Dict[str, str], np.ndarray]:
    """(metadata, rows) from a file written by write_table; the header row is skipped."""
    metadata: Dict[str, str] = {}
    skip = 0
    with open(path, encoding="utf-8") as handle:
        for line in handle:
            if not line.startswith("#"):
                break
            key, _, value = line[1:].rstrip("\n").partition("=")
            metadata[key] = value
            skip += 1
    rows = np.loadtxt(path, delimiter=",", skiprows=skip + 1, ndmin=2, encoding="utf-8")
    return metadata, rows
