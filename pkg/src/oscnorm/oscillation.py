"""BMO and Campanato functionals, their X-norm variants, and average norms.

The central experiment compares, cube by cube, the plain mean oscillation
(1/|Q|) int_Q |f - f_Q| against the normalized X-oscillation
||(f - f_Q) chi_Q||_X / ||chi_Q||_X, then weighs both with phi(Q) and takes
sups.  The sweep is batched by cube side: all cubes of one side form a stack
of blocks, evaluated through the space's block-norm kernel in one shot, so
exhaustive scans stay fast up to level 8 in 1D.

The second family of functionals rescales f restricted to Q onto the unit
cube and measures it there (the average-norm view); its Orlicz special case
is the classical normalized Luxemburg average.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, TextIO

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .conditions import PhiParameter
from .errors import ContractError, UndefinedRatioError
from .grid import Cube, DyadicGrid, GridFunction, average, rescale_to_unit
from .spaces import FunctionSpace, Orlicz, YoungFunction, _luxemburg_orlicz, quasi_norm

__all__ = [
    "OscillationReport",
    "bmo_norm",
    "campanato_norm",
    "x_campanato",
    "per_cube_oscillation_stats",
    "orlicz_average",
    "x_average_norm",
    "average_campanato",
    "technical_condition_ratio",
]


# ---------------------------------------------------------------------------
# batched sweeps over all cubes of one side


def _side_blocks(values: np.ndarray, side: int, dimension: int) -> np.ndarray:
    """All cube restrictions of one side as a stack: (count, side[, side])."""
    if dimension == 1:
        return sliding_window_view(values, side)
    view = sliding_window_view(values, (side, side))
    return view.reshape(-1, side, side)


def _side_corners(grid: DyadicGrid, side: int) -> np.ndarray:
    m = grid.cells_per_side - side + 1
    if grid.dimension == 1:
        return np.arange(m)[:, None]
    a = np.arange(m)
    i, j = np.meshgrid(a, a, indexing="ij")
    return np.column_stack([i.ravel(), j.ravel()])


def _sweep_sides(grid: DyadicGrid) -> Iterator[int]:
    return iter(range(1, grid.cells_per_side + 1))


def per_cube_oscillation_stats(
    f: GridFunction, space: FunctionSpace
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """(corners, sides, l1 oscillation, X ratio) over every cube.

    Cubes appear in enumeration order (side ascending, corners
    lexicographic).  The X ratio of a cube where f is constant is 0.
    """
    grid = f.grid
    v = grid.cell_volume
    n = grid.dimension
    aux = space.aux_field
    if space.bound_grid is not None and space.bound_grid != grid:
        from .errors import IncompatibleSpaceError

        raise IncompatibleSpaceError("space fields live on a different grid")
    corners_out, sides_out, l1_out, ratio_out = [], [], [], []
    for side in _sweep_sides(grid):
        blocks = _side_blocks(f.values, side, n)
        count = blocks.shape[0]
        cells = side**n
        flat = blocks.reshape(count, -1)
        means = flat.sum(axis=1) / cells
        osc = blocks - means.reshape((count,) + (1,) * n)
        l1 = np.abs(osc.reshape(count, -1)).mean(axis=1)
        aux_blocks = None if aux is None else _side_blocks(aux.values, side, n)
        x_norm = space.block_norms(osc, aux_blocks, v)
        chi_norm = space.indicator_block_norms(side, count, aux_blocks, v, n)
        corners_out.append(_side_corners(grid, side))
        sides_out.append(np.full(count, side))
        l1_out.append(l1)
        ratio_out.append(x_norm / chi_norm)
    return (
        np.concatenate(corners_out),
        np.concatenate(sides_out),
        np.concatenate(l1_out),
        np.concatenate(ratio_out),
    )


def bmo_norm(f: GridFunction) -> float:
    """sup over cubes of the mean oscillation (1/|Q|) int_Q |f - f_Q|."""
    grid = f.grid
    best = 0.0
    for side in _sweep_sides(grid):
        blocks = _side_blocks(f.values, side, grid.dimension)
        count = blocks.shape[0]
        flat = blocks.reshape(count, -1)
        means = flat.mean(axis=1)
        best = max(best, float(np.max(np.abs(flat - means[:, None]).mean(axis=1))))
    return best


def campanato_norm(f: GridFunction, phi: PhiParameter, p: float) -> float:
    """sup over cubes of phi(Q) * (mean of |f - f_Q|^p over Q)^(1/p).

    The normalized L^p oscillation ||(f-f_Q)chi_Q||_p / ||chi_Q||_p reduces
    to the p-mean over the cube's cells; phi == 1, p == 1 is the BMO norm.
    """
    if p < 1.0:
        raise ValueError(f"need p >= 1, got {p}")
    grid = f.grid
    best = 0.0
    for side in _sweep_sides(grid):
        blocks = _side_blocks(f.values, side, grid.dimension)
        count = blocks.shape[0]
        flat = blocks.reshape(count, -1)
        means = flat.sum(axis=1) / flat.shape[1]
        devs = np.abs(flat - means[:, None])
        ratios = (devs**p).mean(axis=1) ** (1.0 / p) if p != 1.0 else devs.mean(axis=1)
        phis = phi.at_cubes(grid, side, _side_corners(grid, side))
        best = max(best, float(np.max(phis * ratios)))
    return best


@dataclass(frozen=True)
class OscillationReport:
    """Per-cube oscillation records plus the sup aggregates.

    Arrays are parallel, one entry per cube in enumeration order.  The
    aggregates are the maxima of phi * l1_osc and phi * x_ratio; the ratio
    conventions send 0/0 to 1 (constant functions).
    """

    corners: np.ndarray
    sides: np.ndarray
    phi: np.ndarray
    l1_osc: np.ndarray
    x_ratio: np.ndarray
    campanato: float
    x_campanato: float
    lower_ratio: float
    upper_ratio: float

    @classmethod
    def build(cls, corners, sides, phi, l1_osc, x_ratio) -> "OscillationReport":
        campanato = float(np.max(phi * l1_osc))
        x_campanato = float(np.max(phi * x_ratio))
        if campanato == 0.0 and x_campanato == 0.0:
            lower = upper = 1.0
        else:
            lower = campanato / x_campanato if x_campanato > 0.0 else math.inf
            upper = x_campanato / campanato if campanato > 0.0 else math.inf
        return cls(corners, sides, phi, l1_osc, x_ratio, campanato, x_campanato, lower, upper)

    def __len__(self) -> int:
        return len(self.sides)

    def aggregate_dict(self) -> dict:
        return {
            "campanato": self.campanato,
            "x_campanato": self.x_campanato,
            "lower_ratio": self.lower_ratio,
            "upper_ratio": self.upper_ratio,
        }

    def write_csv(self, stream: TextIO) -> None:
        n = self.corners.shape[1]
        header = [f"corner{k}" for k in range(n)] + ["side_cells", "phi", "l1_osc", "x_ratio"]
        stream.write(",".join(header) + "\n")
        for i in range(len(self)):
            cols = [str(int(c)) for c in self.corners[i]]
            cols.append(str(int(self.sides[i])))
            cols += [f"{x:.17g}" for x in (self.phi[i], self.l1_osc[i], self.x_ratio[i])]
            stream.write(",".join(cols) + "\n")


def x_campanato(f: GridFunction, phi: PhiParameter, space: FunctionSpace) -> OscillationReport:
    """Per-cube comparison of L^1 and X oscillation ratios with weights phi(Q)."""
    corners, sides, l1, ratio = per_cube_oscillation_stats(f, space)
    phis = np.concatenate(
        [
            phi.at_cubes(f.grid, side, corners[sides == side])
            for side in sorted(set(sides.tolist()))
        ]
    )
    return OscillationReport.build(corners, sides, phis, l1, ratio)


# ---------------------------------------------------------------------------
# average norms over a cube


def orlicz_average(f: GridFunction, phi: YoungFunction, cube: Cube) -> float:
    """inf{lam : (1/|Q|) int_Q Phi(|f|/lam) <= 1}, the normalized Luxemburg value."""
    block = f.values[cube.slices]
    return float(_luxemburg_orlicz(phi, block[None, ...], 1.0 / cube.cell_count)[0])


def x_average_norm(f: GridFunction, space: FunctionSpace, cube: Cube) -> float:
    """Norm in X of f restricted to Q and rescaled onto the unit cube.

    Grid-valued space fields are block-averaged down to the rescaled
    resolution; constant fields pass through unchanged.
    """
    rescaled = rescale_to_unit(f, cube)
    return quasi_norm(space.rebind(rescaled.grid), rescaled)


def average_campanato(f: GridFunction, phi: PhiParameter, space: FunctionSpace) -> float:
    """sup of phi(Q) * ||f - f_Q||_{X,Q} over power-of-two-side cubes.

    The index family is restricted to sides 1, 2, 4, ... so that the
    rescaling is lossless; corners remain unconstrained.
    """
    grid = f.grid
    n = grid.dimension
    best = 0.0
    side = 1
    while side <= grid.cells_per_side:
        target = DyadicGrid(n, side.bit_length() - 1)
        bound = space.rebind(target)
        aux = bound.aux_field
        blocks = _side_blocks(f.values, side, n)
        count = blocks.shape[0]
        flat = blocks.reshape(count, -1)
        means = flat.sum(axis=1) / flat.shape[1]
        osc = blocks - means.reshape((count,) + (1,) * n)
        aux_blocks = (
            None if aux is None else np.broadcast_to(aux.values[None, ...], osc.shape)
        )
        norms = bound.block_norms(osc, aux_blocks, target.cell_volume)
        phis = phi.at_cubes(grid, side, _side_corners(grid, side))
        best = max(best, float(np.max(phis * norms)))
        side *= 2
    return best


def technical_condition_ratio(f: GridFunction, space: FunctionSpace, cube: Cube) -> float:
    """f_Q / ||f||_{X,Q} for nonnegative f, the average-vs-norm comparison."""
    if np.any(f.values < 0.0):
        raise ContractError("the ratio is defined for nonnegative functions")
    denom = x_average_norm(f, space, cube)
    if denom == 0.0:
        raise UndefinedRatioError("f vanishes on the cube")
    return average(f, cube) / denom
