"""Data behind the three published curves: model-1 revivals, model-2 decay and the switching profiles."""
import logging
import math
from pathlib import Path
from typing import Dict, List

import numpy as np

from .analytic import kappa_model1_limit, kappa_model2_integral
from .core import eval_coupling
from .output import write_table
from .schema import ChainSpec, CouplingSchedule, ScheduleKind, TimeGrid

logger = logging.getLogger("spinbath")

FIGURE_SAMPLES = 401
SWITCH_RATES = (0.1, 0.5, 1.0, 10.0)
SWITCH_WINDOW = 20.0


def _kappa_columns(values: np.ndarray) -> List[np.ndarray]:
    values = np.asarray(values, dtype=complex)
    return [values.real, values.imag]


def revival_grid(V: float) -> TimeGrid:
    """[0, 4 pi / V]; 401 samples put every t = m pi / V on the grid."""
    return TimeGrid(t_start=0.0, t_end=4.0 * math.pi / V, n_samples=FIGURE_SAMPLES)


def decay_grid(V: float) -> TimeGrid:
    return TimeGrid(t_start=0.0, t_end=20.0 / V, n_samples=FIGURE_SAMPLES)


def switch_grid() -> TimeGrid:
    return TimeGrid(t_start=-SWITCH_WINDOW, t_end=SWITCH_WINDOW, n_samples=FIGURE_SAMPLES)


def figure_revivals(spec: ChainSpec) -> np.ndarray:
    """Columns t, kappa_re, kappa_im of the large-N model-1 factor."""
    t = revival_grid(spec.v_coupling).times()
    return np.column_stack([t, *_kappa_columns(kappa_model1_limit(spec.j_coupling, spec.v_coupling, t))])


def figure_decay(spec: ChainSpec) -> np.ndarray:
    """Columns t, kappa_re, kappa_im of the large-N model-2 factor."""
    t = decay_grid(spec.v_coupling).times()
    return np.column_stack([t, *_kappa_columns(kappa_model2_integral(spec.j_coupling, spec.v_coupling, t))])


def figure_switching() -> np.ndarray:
    """J(t)/J0 for switch-off ramps centred at t = 0, one column per rate."""
    t = switch_grid().times()
    columns = [t]
    for rate in SWITCH_RATES:
        schedule = CouplingSchedule(kind=ScheduleKind.SWITCH_OFF, j0=1.0, rate=rate, t_off=0.0)
        columns.append(np.asarray(eval_coupling(schedule, t)))
    return np.column_stack(columns)


def switching_columns() -> List[str]:
    return ["t"] + [f"k_{rate:g}" for rate in SWITCH_RATES]


def write_figures(spec: ChainSpec, out_dir: Path) -> Dict[str, Path]:
    """
    Write fig2.csv, fig3.csv and fig4.csv into ``out_dir``.

    Args:
        spec: supplies J and V; fig2 always uses model 1 and fig3 model 2 in the large-N limit.
        out_dir: created if missing.
    """
    out_dir = Path(out_dir)
    common = {"J": repr(spec.j_coupling), "V": repr(spec.v_coupling)}
    kappa_columns = ["t", "kappa_re", "kappa_im"]
    paths = {
        "fig2": write_table(out_dir / "fig2.csv", kappa_columns, figure_revivals(spec),
                            {**common, "backend": "integral-limit", "model": "ising"}),
        "fig3": write_table(out_dir / "fig3.csv", kappa_columns, figure_decay(spec),
                            {**common, "backend": "integral-limit", "model": "xx"}),
        "fig4": write_table(out_dir / "fig4.csv", switching_columns(), figure_switching(),
                            {"schedule": "switch-off", "t_off": "0"}),
    }
    logger.info(f"Figure data written to {out_dir}")
    return paths
