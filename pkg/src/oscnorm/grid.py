"""Dyadic grids on the unit cube and exact piecewise-constant functions on them.

Everything downstream (norms, maximal functions, decompositions) lives on a
uniform dyadic discretization of [0, 1)^n.  Functions are constant on cells,
so every integral is a finite sum and every cube average is an arithmetic
mean of cell values.  All types are immutable; all operations are pure.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterator, Sequence, TextIO

import numpy as np

from .errors import (
    InvalidCubeError,
    SpecFormatError,
    UnsupportedCubeError,
    UnsupportedDilationError,
)

__all__ = [
    "DyadicGrid",
    "Cube",
    "GridFunction",
    "indicator",
    "average",
    "oscillation",
    "enumerate_cubes",
    "cube_count",
    "dyadic_descendants",
    "dilate",
    "rescale_to_unit",
    "read_grid_function",
    "write_grid_function",
]


def _is_power_of_two(k: int) -> bool:
    return k >= 1 and (k & (k - 1)) == 0


@dataclass(frozen=True)
class DyadicGrid:
    """Uniform dyadic grid on [0, 1)^n with 2**level cells per side.

    Level 0 (a single cell) is allowed so that rescaling a one-cell cube onto
    the unit cube stays representable; user-facing entry points use level >= 1.
    """

    dimension: int
    level: int

    def __post_init__(self) -> None:
        if self.dimension not in (1, 2):
            raise ValueError(f"dimension must be 1 or 2, got {self.dimension}")
        if not 0 <= self.level <= 20:
            raise ValueError(f"level must be in [0, 20], got {self.level}")

    @property
    def cells_per_side(self) -> int:
        return 1 << self.level

    @property
    def cell_side(self) -> float:
        return 2.0 ** -self.level

    @property
    def cell_volume(self) -> float:
        return 2.0 ** (-self.level * self.dimension)

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.cells_per_side,) * self.dimension

    @property
    def cell_count(self) -> int:
        return self.cells_per_side**self.dimension

    def cell_centers(self) -> np.ndarray:
        """Cell center coordinates, shape (cell_count, dimension), row-major."""
        axis = (np.arange(self.cells_per_side) + 0.5) * self.cell_side
        if self.dimension == 1:
            return axis[:, None]
        xx, yy = np.meshgrid(axis, axis, indexing="ij")
        return np.column_stack([xx.ravel(), yy.ravel()])

    def base_cube(self) -> "Cube":
        return Cube(self, (0,) * self.dimension, self.cells_per_side)


@dataclass(frozen=True)
class Cube:
    """Grid-aligned axis-parallel cube: half-open, anchored at a cell corner."""

    grid: DyadicGrid
    corner: tuple[int, ...]
    side_cells: int

    def __post_init__(self) -> None:
        corner = self.corner
        if isinstance(corner, (int, np.integer)):
            corner = (int(corner),)
        corner = tuple(int(c) for c in corner)
        object.__setattr__(self, "corner", corner)
        object.__setattr__(self, "side_cells", int(self.side_cells))
        if len(corner) != self.grid.dimension:
            raise InvalidCubeError(
                f"corner {corner} has {len(corner)} coordinates, grid is "
                f"{self.grid.dimension}-dimensional"
            )
        if self.side_cells < 1:
            raise InvalidCubeError(f"side_cells must be >= 1, got {self.side_cells}")
        limit = self.grid.cells_per_side
        for c in corner:
            if c < 0 or c + self.side_cells > limit:
                raise InvalidCubeError(
                    f"cube corner={corner} side_cells={self.side_cells} leaves the "
                    f"base cube (cells per side: {limit})"
                )

    @property
    def side_length(self) -> float:
        return self.side_cells * self.grid.cell_side

    @property
    def measure(self) -> float:
        return self.side_length**self.grid.dimension

    @property
    def cell_count(self) -> int:
        return self.side_cells**self.grid.dimension

    @property
    def slices(self) -> tuple[slice, ...]:
        return tuple(slice(c, c + self.side_cells) for c in self.corner)

    def center(self) -> tuple[float, ...]:
        h = self.grid.cell_side
        return tuple((c + self.side_cells / 2.0) * h for c in self.corner)

    def has_power_of_two_side(self) -> bool:
        return _is_power_of_two(self.side_cells)

    def flat_indices(self) -> np.ndarray:
        """Row-major flat indices of the cells covered by this cube."""
        n = self.grid.cells_per_side
        if self.grid.dimension == 1:
            return np.arange(self.corner[0], self.corner[0] + self.side_cells)
        rows = np.arange(self.corner[0], self.corner[0] + self.side_cells)
        cols = np.arange(self.corner[1], self.corner[1] + self.side_cells)
        return (rows[:, None] * n + cols[None, :]).ravel()

    def contains(self, other: "Cube") -> bool:
        if other.grid != self.grid:
            return False
        return all(
            sc <= oc and oc + other.side_cells <= sc + self.side_cells
            for sc, oc in zip(self.corner, other.corner)
        )


class GridFunction:
    """Real-valued function on [0, 1)^n, constant on the cells of a grid.

    Values are stored as a read-only float64 array shaped like the grid
    (row-major).  All values must be finite.
    """

    __slots__ = ("grid", "values")

    def __init__(self, grid: DyadicGrid, values) -> None:
        arr = np.asarray(values, dtype=np.float64)
        if arr.size != grid.cell_count:
            raise ValueError(
                f"expected {grid.cell_count} values for the grid, got {arr.size}"
            )
        arr = arr.reshape(grid.shape).copy()
        if not np.all(np.isfinite(arr)):
            raise ValueError("grid function values must all be finite")
        arr.setflags(write=False)
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", arr)

    def __setattr__(self, name, value):  # immutability
        raise AttributeError("GridFunction is immutable")

    @property
    def flat(self) -> np.ndarray:
        return self.values.reshape(-1)

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.values)))

    def __add__(self, other):
        return self._combine(other, lambda a, b: a + b)

    __radd__ = __add__

    def __sub__(self, other):
        return self._combine(other, lambda a, b: a - b)

    def __mul__(self, other):
        return self._combine(other, lambda a, b: a * b)

    __rmul__ = __mul__

    def __neg__(self):
        return GridFunction(self.grid, -self.values)

    def __abs__(self):
        return GridFunction(self.grid, np.abs(self.values))

    def _combine(self, other, op):
        if isinstance(other, GridFunction):
            if other.grid != self.grid:
                raise InvalidCubeError("grid functions live on different grids")
            return GridFunction(self.grid, op(self.values, other.values))
        return GridFunction(self.grid, op(self.values, float(other)))


def _check_cube(f: GridFunction, cube: Cube) -> None:
    if cube.grid != f.grid:
        raise InvalidCubeError("cube belongs to a different grid")


def indicator(cube: Cube) -> GridFunction:
    """Characteristic function of the cube: 1 on its cells, 0 elsewhere."""
    values = np.zeros(cube.grid.shape)
    values[cube.slices] = 1.0
    return GridFunction(cube.grid, values)


def average(f: GridFunction, cube: Cube) -> float:
    """Mean of f over the cube, i.e. (1/|Q|) * integral of f over Q.

    Computed as the arithmetic mean of the covered cell values with numpy's
    pairwise summation in ascending cell order, so results are reproducible
    bit for bit.
    """
    _check_cube(f, cube)
    block = f.values[cube.slices]
    return float(np.sum(block) / block.size)


def oscillation(f: GridFunction, cube: Cube) -> GridFunction:
    """(f - mean of f over Q) on Q, zero outside Q."""
    _check_cube(f, cube)
    mean = average(f, cube)
    values = np.zeros(f.grid.shape)
    values[cube.slices] = f.values[cube.slices] - mean
    return GridFunction(f.grid, values)


def enumerate_cubes(grid: DyadicGrid) -> Iterator[Cube]:
    """Every grid-aligned cube, exactly once.

    Order is deterministic: side length ascending, then corner
    lexicographically.  Downstream reports rely on this order.
    """
    limit = grid.cells_per_side
    for side in range(1, limit + 1):
        for corner in itertools.product(range(limit - side + 1), repeat=grid.dimension):
            yield Cube(grid, corner, side)


def cube_count(grid: DyadicGrid) -> int:
    limit = grid.cells_per_side
    return sum((limit - s + 1) ** grid.dimension for s in range(1, limit + 1))


def dyadic_descendants(cube: Cube) -> list[Cube]:
    """All cubes obtained from Q by repeated bisection, Q itself included.

    Emitted generation by generation (Q first, then its 2^n children, ...).
    Requires a power-of-two side.
    """
    if not cube.has_power_of_two_side():
        raise UnsupportedCubeError(
            f"dyadic descendants need a power-of-two side, got {cube.side_cells}"
        )
    out = []
    side = cube.side_cells
    depth = 0
    while side >= 1:
        blocks = cube.side_cells // side
        for offsets in itertools.product(range(blocks), repeat=cube.grid.dimension):
            corner = tuple(c + o * side for c, o in zip(cube.corner, offsets))
            out.append(Cube(cube.grid, corner, side))
        side //= 2
        depth += 1
    return out


def dyadic_children(cube: Cube) -> list[Cube]:
    """The 2^n cubes from one bisection of Q (empty list for a single cell)."""
    if not cube.has_power_of_two_side():
        raise UnsupportedCubeError(
            f"bisection needs a power-of-two side, got {cube.side_cells}"
        )
    if cube.side_cells == 1:
        return []
    half = cube.side_cells // 2
    return [
        Cube(cube.grid, tuple(c + o * half for c, o in zip(cube.corner, offsets)), half)
        for offsets in itertools.product(range(2), repeat=cube.grid.dimension)
    ]


def dilate(f: GridFunction, j: int) -> GridFunction:
    """Stretch by 2**j: returns g with g(x) = f(x / 2**j).

    Requires 0 <= j <= level and f supported on [0, 2**-j)^n, otherwise data
    would leave the base cube.  Exact: each source cell value is copied into
    a block of 2**(n*j) target cells, no arithmetic involved.
    """
    grid = f.grid
    if not 0 <= j <= grid.level:
        raise UnsupportedDilationError(f"need 0 <= j <= {grid.level}, got {j}")
    if j == 0:
        return f
    keep = grid.cells_per_side >> j
    support = f.values[(slice(0, keep),) * grid.dimension]
    outside = f.values.copy()
    outside[(slice(0, keep),) * grid.dimension] = 0.0
    if np.any(outside != 0.0):
        raise UnsupportedDilationError(
            f"function has support outside [0, 2^-{j})^{grid.dimension}"
        )
    stretched = support
    for axis in range(grid.dimension):
        stretched = np.repeat(stretched, 1 << j, axis=axis)
    return GridFunction(grid, stretched)


def rescale_to_unit(f: GridFunction, cube: Cube) -> GridFunction:
    """Map f restricted to Q affinely onto the unit cube, losslessly.

    The result is x -> f(corner + side_length * x) on a grid with
    `side_cells` cells per side, so every sample survives.  Requires a
    power-of-two side.
    """
    _check_cube(f, cube)
    if not cube.has_power_of_two_side():
        raise UnsupportedCubeError(
            f"rescaling needs a power-of-two side, got {cube.side_cells}"
        )
    target = DyadicGrid(f.grid.dimension, cube.side_cells.bit_length() - 1)
    return GridFunction(target, f.values[cube.slices])


def write_grid_function(f: GridFunction, target) -> None:
    """Serialize in the text format: header "n L", then one value per line.

    Values are written row-major with shortest round-trip precision.
    `target` is a path or a writable text stream.
    """
    if hasattr(target, "write"):
        _write_stream(f, target)
    else:
        with open(target, "w", encoding="utf-8") as handle:
            _write_stream(f, handle)


def _write_stream(f: GridFunction, stream: TextIO) -> None:
    stream.write(f"{f.grid.dimension} {f.grid.level}\n")
    for v in f.flat:
        stream.write(repr(float(v)))
        stream.write("\n")


def read_grid_function(source) -> GridFunction:
    """Parse the text format written by write_grid_function."""
    if hasattr(source, "read"):
        text = source.read()
    else:
        with open(source, "r", encoding="utf-8") as handle:
            text = handle.read()
    lines = [line.strip() for line in text.splitlines()]
    lines = [line for line in lines if line]
    if not lines:
        raise SpecFormatError("empty grid function file")
    header = lines[0].split()
    if len(header) != 2:
        raise SpecFormatError(f"expected header 'n L', got {lines[0]!r}")
    try:
        dimension, level = int(header[0]), int(header[1])
        grid = DyadicGrid(dimension, level)
    except ValueError as exc:
        raise SpecFormatError(f"bad header {lines[0]!r}: {exc}") from exc
    body = lines[1:]
    if len(body) != grid.cell_count:
        raise SpecFormatError(
            f"expected {grid.cell_count} values, found {len(body)}"
        )
    try:
        values = np.array([float(tok) for tok in body])
    except ValueError as exc:
        raise SpecFormatError(f"bad value in grid function file: {exc}") from exc
    if not np.all(np.isfinite(values)):
        raise SpecFormatError("grid function file contains non-finite values")
    return GridFunction(grid, values)
