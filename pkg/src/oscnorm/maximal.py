"""Hardy-Littlewood maximal operator on the grid, plus boundedness probes.

(Mf)(x) is the largest average of |f| over a grid cube containing x.  The
cube family is truncated to the base cube, so M here differs from the
continuum operator near the boundary; every inequality probed downstream
uses this same truncated M on both sides, which keeps the comparisons
internally consistent.

Two modes: "full" ranges over every grid-aligned cube, "dyadic" over the
bisection tree of the base cube.  The dyadic mode computes cube sums by
pairing children in a fixed order, which makes the dilation commutation
identity hold exactly in floating point (dilating a function repeats values
in power-of-two blocks, and those tree sums scale by exact powers of two).
"""

from __future__ import annotations

import numpy as np

from .errors import ContractError, UndefinedRatioError
from .grid import Cube, DyadicGrid, GridFunction, dilate, enumerate_cubes
from .spaces import FunctionSpace, quasi_norm

__all__ = [
    "maximal",
    "maximal_of_indicator_lower",
    "weak_bound_ratio",
    "vector_valued_ratio",
    "dilation_commutation_check",
]

MODES = ("full", "dyadic")


def _check_mode(mode: str) -> None:
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")


def maximal(f: GridFunction, mode: str = "full") -> GridFunction:
    """Cellwise max of averages of |f| over cubes containing the cell."""
    _check_mode(mode)
    if mode == "dyadic":
        return GridFunction(f.grid, _maximal_dyadic(np.abs(f.values), f.grid))
    return GridFunction(f.grid, _maximal_full(np.abs(f.values), f.grid))


def _maximal_full(a: np.ndarray, grid: DyadicGrid) -> np.ndarray:
    out = a.copy()  # the single-cell cube gives |f| itself
    limit = grid.cells_per_side
    n = grid.dimension
    if n == 1:
        for side in range(2, limit + 1):
            for corner in range(limit - side + 1):
                block = a[corner : corner + side]
                avg = np.sum(block) / side
                seg = out[corner : corner + side]
                np.maximum(seg, avg, out=seg)
    else:
        cells = 0
        for side in range(2, limit + 1):
            cells = side * side
            for ci in range(limit - side + 1):
                for cj in range(limit - side + 1):
                    block = a[ci : ci + side, cj : cj + side]
                    avg = np.sum(block) / cells
                    seg = out[ci : ci + side, cj : cj + side]
                    np.maximum(seg, avg, out=seg)
    return out


def _dyadic_tree_sums(a: np.ndarray, grid: DyadicGrid) -> list[np.ndarray]:
    """Sums of a over dyadic cubes, level L down to 0, children paired in fixed order."""
    sums = [a]
    current = a
    for _ in range(grid.level):
        if grid.dimension == 1:
            pairs = current.reshape(-1, 2)
            current = pairs[:, 0] + pairs[:, 1]
        else:
            m = current.shape[0] // 2
            quads = current.reshape(m, 2, m, 2)
            current = (quads[:, 0, :, 0] + quads[:, 0, :, 1]) + (
                quads[:, 1, :, 0] + quads[:, 1, :, 1]
            )
        sums.append(current)
    return sums


def _maximal_dyadic(a: np.ndarray, grid: DyadicGrid) -> np.ndarray:
    sums = _dyadic_tree_sums(a, grid)
    n = grid.dimension
    # walk back down, carrying the running max of ancestor averages
    running = None
    for depth in range(grid.level, -1, -1):
        count = float((1 << depth) ** n)  # cells per cube at this level
        avg = sums[depth] / count
        if running is None:
            running = avg
        else:
            for axis in range(n):
                running = np.repeat(running, 2, axis=axis)
            running = np.maximum(running, avg)
    return running


def _as_cell_mask(E, grid: DyadicGrid) -> np.ndarray:
    mask = np.zeros(grid.cell_count, dtype=bool)
    arr = np.asarray(E)
    if arr.dtype == bool:
        if arr.size != grid.cell_count:
            raise ContractError("boolean cell mask has the wrong size")
        mask = arr.reshape(-1).copy()
    else:
        idx = arr.astype(int).reshape(-1)
        if idx.size and (idx.min() < 0 or idx.max() >= grid.cell_count):
            raise ContractError("cell index out of range")
        mask[idx] = True
    return mask


def maximal_of_indicator_lower(E, cube: Cube) -> float:
    """Minimum of M(chi_E) over the cells of Q for E inside Q with |Q| <= 2|E|.

    Since Q itself is an admissible cube, M(chi_E) >= |E|/|Q| >= 1/2 holds on
    all of Q; the attained minimum is returned and the bound is re-verified.
    E is a set of flat cell indices (or a boolean mask over the grid).
    """
    grid = cube.grid
    mask = _as_cell_mask(E, grid)
    inside = np.zeros(grid.cell_count, dtype=bool)
    inside[cube.flat_indices()] = True
    if np.any(mask & ~inside):
        raise ContractError("E must be contained in Q")
    e_cells = int(mask.sum())
    if cube.cell_count > 2 * e_cells:
        raise ContractError(
            f"need |Q| <= 2|E|: Q has {cube.cell_count} cells, E has {e_cells}"
        )
    chi = GridFunction(grid, mask.astype(np.float64))
    m = maximal(chi, mode="full")
    attained = float(np.min(m.values[cube.slices]))
    floor = e_cells / cube.cell_count
    if attained < floor:
        raise ContractError("maximal function dipped below the density bound")
    return attained


def weak_bound_ratio(
    space: FunctionSpace, f: GridFunction, lam: float, mode: str = "full"
) -> float:
    """lam * ||chi_{Mf > lam}||_X / ||f||_X, the weak-type boundedness ratio."""
    if lam <= 0.0:
        raise ValueError(f"level must be positive, got {lam}")
    denom = quasi_norm(space, f)
    if denom == 0.0:
        raise UndefinedRatioError("weak bound ratio of the zero function")
    level_set = maximal(f, mode).values > lam
    chi = GridFunction(f.grid, level_set.astype(np.float64))
    return lam * quasi_norm(space, chi) / denom


def vector_valued_ratio(
    space: FunctionSpace,
    fs: list[GridFunction],
    eta: float,
    mode: str = "full",
    rooted: bool = False,
) -> float:
    """||sum_j (M f_j)^eta||_X / ||sum_j |f_j|^eta||_X for a finite family.

    With rooted=True both sums are raised to 1/eta before taking norms,
    which is the comparison form used in vector-valued maximal inequalities;
    the default matches the unrooted hypothesis probed here.
    """
    if not fs:
        raise ContractError("need at least one function")
    if eta <= 1.0:
        raise ValueError(f"eta must exceed 1, got {eta}")
    grid = fs[0].grid
    num = np.zeros(grid.shape)
    den = np.zeros(grid.shape)
    for f in fs:
        if f.grid != grid:
            raise ContractError("family members must share a grid")
        num += maximal(f, mode).values**eta
        den += np.abs(f.values) ** eta
    if rooted:
        num = num ** (1.0 / eta)
        den = den ** (1.0 / eta)
    denom = quasi_norm(space, GridFunction(grid, den))
    if denom == 0.0:
        raise UndefinedRatioError("vector-valued ratio of an all-zero family")
    return quasi_norm(space, GridFunction(grid, num)) / denom


def dilation_commutation_check(f: GridFunction, j: int, mode: str = "full") -> float:
    """Max cellwise gap between M(dilate(f)) and dilate(Mf restricted to the support cube).

    Exactly 0 in dyadic mode when f is supported on [0, 2^-j)^n; in full mode
    the truncated cube family is not dilation-invariant, so a nonnegative
    deviation is reported rather than asserted away.
    """
    _check_mode(mode)
    grid = f.grid
    lhs = maximal(dilate(f, j), mode)
    mf = maximal(f, mode)
    keep = grid.cells_per_side >> j
    restricted = np.zeros(grid.shape)
    region = (slice(0, keep),) * grid.dimension
    restricted[region] = mf.values[region]
    rhs = dilate(GridFunction(grid, restricted), j)
    return float(np.max(np.abs(lhs.values - rhs.values)))
