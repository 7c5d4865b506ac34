"""Read-only figure rendering for quantum landscape experiment files.

This package consumes the grid, mask, records, and summary files produced
by the landscape experiment tooling through their documented on-disk
formats; it has no dependency on the code that wrote them.
"""

from .figures import (
    COLOR_FLOOR,
    FIGURE_KINDS,
    STALL_NORM,
    STALL_STEPS,
    FigureSpec,
    QuantileTable,
    quantile_table,
    render,
    render_quantiles,
    render_success,
    render_trajectories,
    render_triptych,
)
from .readers import (
    FileFormatError,
    GridData,
    MaskData,
    RunTrajectory,
    read_grid_file,
    read_mask_file,
    read_records_csv,
    read_summary,
)

__all__ = [
    "COLOR_FLOOR",
    "FIGURE_KINDS",
    "STALL_NORM",
    "STALL_STEPS",
    "FigureSpec",
    "FileFormatError",
    "GridData",
    "MaskData",
    "QuantileTable",
    "RunTrajectory",
    "quantile_table",
    "read_grid_file",
    "read_mask_file",
    "read_records_csv",
    "read_summary",
    "render",
    "render_quantiles",
    "render_success",
    "render_trajectories",
    "render_triptych",
]

__version__ = "0.1.0"
