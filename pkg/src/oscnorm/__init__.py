"""Oscillation norms over quasi-Banach function spaces on dyadic grids."""

__version__ = "0.1.0"

from .grid import (
    Cube,
    DyadicGrid,
    GridFunction,
    average,
    dilate,
    dyadic_descendants,
    enumerate_cubes,
    indicator,
    oscillation,
    read_grid_function,
    rescale_to_unit,
    write_grid_function,
)

__all__ = [
    "__version__",
    "Cube",
    "DyadicGrid",
    "GridFunction",
    "average",
    "dilate",
    "dyadic_descendants",
    "enumerate_cubes",
    "indicator",
    "oscillation",
    "read_grid_function",
    "rescale_to_unit",
    "write_grid_function",
]
