"""Sparse decomposition of a function over a dyadic root cube.

A stopping-time construction: starting from the root Q0, descend to the
maximal dyadic subcubes P where the mean of |f - f_Q| over P exceeds alpha
times the mean oscillation of f over Q, hand each such P its own fresh
decomposition, and let Q own the leftover cells E_Q.  A Chebyshev count
gives sum |P| < |Q| / alpha, so alpha >= 2 forces |E_Q| >= |Q| / 2: the
output is a sparse family, and the oscillation-weighted indicator sum it
induces dominates |f - f_Q0| pointwise on Q0.

All stopping comparisons run in exact integer arithmetic (cell values are
binary rationals), so the family is invariant, bit for bit, under any affine
change f -> a*f + b (a > 0) that is exactly representable cellwise.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator

import numpy as np

from .errors import ContractError, UnsupportedCubeError
from .grid import Cube, GridFunction, dyadic_children, dyadic_descendants

__all__ = [
    "SparseEntry",
    "SparseFamily",
    "cz_sparse",
    "sparse_majorant",
    "domination_constant",
]


@dataclass(frozen=True)
class SparseEntry:
    """One cube of the family together with the cells it owns."""

    cube: Cube
    owned_cells: np.ndarray  # sorted flat cell indices, pairwise disjoint across entries
    mean_oscillation: float  # (1/|Q|) int_Q |f - f_Q|


@dataclass(frozen=True)
class SparseFamily:
    root: Cube
    entries: tuple[SparseEntry, ...]

    def __iter__(self) -> Iterator[SparseEntry]:
        return iter(self.entries)

    def __len__(self) -> int:
        return len(self.entries)

    def validate(self) -> None:
        """Exact checks of every structural invariant; raises on violation."""
        descendants = {(q.corner, q.side_cells) for q in dyadic_descendants(self.root)}
        seen: set[int] = set()
        for entry in self.entries:
            q = entry.cube
            if (q.corner, q.side_cells) not in descendants:
                raise ContractError(f"{q} is not a dyadic descendant of the root")
            cube_cells = set(q.flat_indices().tolist())
            owned = set(entry.owned_cells.tolist())
            if not owned <= cube_cells:
                raise ContractError(f"owned cells of {q} leave the cube")
            if seen & owned:
                raise ContractError("owned cell sets are not pairwise disjoint")
            seen |= owned
            if q.cell_count > 2 * len(owned):
                raise ContractError(
                    f"sparseness violated on {q}: {q.cell_count} cells, "
                    f"{len(owned)} owned"
                )

    def total_owned_cells(self) -> int:
        return sum(len(e.owned_cells) for e in self.entries)


def _scaled_integers(values: np.ndarray) -> tuple[list[int], int]:
    """Cell values as exact integers over a common 2^shift denominator."""
    ratios = [float(v).as_integer_ratio() for v in values.tolist()]
    shift = max(den.bit_length() - 1 for _, den in ratios)
    return [num << (shift - (den.bit_length() - 1)) for num, den in ratios], shift


def cz_sparse(f: GridFunction, root: Cube, alpha: float = 2.0) -> SparseFamily:
    """Sparse family on the dyadic tree of `root` with stopping factor alpha.

    Cubes with zero oscillation (constants, single cells) terminate at once
    and own all of their cells.  Entries come out in depth-first order.
    """
    if root.grid != f.grid:
        raise ContractError("root cube belongs to a different grid")
    if not root.has_power_of_two_side():
        raise UnsupportedCubeError(
            f"root side must be a power of two, got {root.side_cells}"
        )
    if not alpha >= 2.0:
        raise ValueError(f"stopping factor must be >= 2, got {alpha}")
    alpha_frac = Fraction(alpha)
    ints, shift = _scaled_integers(f.flat)

    entries: list[SparseEntry] = []
    pending = [root]
    while pending:
        cube = pending.pop()
        cells = cube.flat_indices()
        k = cube.cell_count
        total = sum(ints[i] for i in cells.tolist())
        # deviations from the cube mean, scaled by k to stay integral
        dev = {int(i): abs(k * ints[i] - total) for i in cells.tolist()}
        osc_sum = sum(dev.values())  # = k^2 * 2^shift * mean oscillation
        if osc_sum == 0:
            entries.append(SparseEntry(cube, np.sort(cells), 0.0))
            continue
        stops: list[Cube] = []

        def descend(child: Cube) -> None:
            child_sum = sum(dev[int(i)] for i in child.flat_indices().tolist())
            # mean_P |f - f_Q| > alpha * mean_Q |f - f_Q|, cleared of denominators
            lhs = k * child_sum * alpha_frac.denominator
            rhs = alpha_frac.numerator * child.cell_count * osc_sum
            if lhs > rhs:
                stops.append(child)
            elif child.side_cells > 1:
                for grandchild in dyadic_children(child):
                    descend(grandchild)

        for top in dyadic_children(cube):
            descend(top)
        stopped = (
            np.concatenate([s.flat_indices() for s in stops])
            if stops
            else np.empty(0, dtype=np.int64)
        )
        owned = np.setdiff1d(cells, stopped)
        mean_osc = float(Fraction(osc_sum, k * k) / (1 << shift))
        entries.append(SparseEntry(cube, owned, mean_osc))
        pending.extend(reversed(stops))  # stack order keeps emission depth-first
    return SparseFamily(root, tuple(entries))


def sparse_majorant(family: SparseFamily, f: GridFunction) -> GridFunction:
    """Sum over the family of (mean oscillation of f over Q) * chi_Q."""
    if family.root.grid != f.grid:
        raise ContractError("family and function live on different grids")
    out = np.zeros(f.grid.shape)
    for entry in family.entries:
        q = entry.cube
        block = f.values[q.slices]
        mean = np.sum(block) / block.size
        osc = np.sum(np.abs(block - mean)) / block.size
        out[q.slices] += osc
    return GridFunction(f.grid, out)


def domination_constant(f: GridFunction, root: Cube, alpha: float = 2.0) -> float:
    """Max over the root's cells of |f - f_root| / majorant.

    0/0 counts as 0 (both sides vanish together); a positive numerator over
    a zero majorant is reported as +inf, signalling a failure of the
    pointwise domination rather than raising.
    """
    family = cz_sparse(f, root, alpha)
    majorant = sparse_majorant(family, f).values[root.slices]
    block = f.values[root.slices]
    deviation = np.abs(block - np.sum(block) / block.size)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = deviation / majorant
    ratio = np.where(deviation == 0.0, 0.0, ratio)
    return float(np.max(ratio))
