"""Quasi-norm evaluators for six families of function spaces on the grid.

Covered: Lebesgue L^p, weighted L^p(w), weighted Lorentz L^{p,q}(w), Orlicz
L^Phi (Luxemburg norm), variable-exponent L^{p(.)}, and Morrey M^p_q.  Each
space evaluates norms in batch over a stack of "blocks" (restrictions of a
function to same-sized cubes); a single function is the one-block case, so
the batched oscillation sweeps and the scalar API share one code path.

Lebesgue, weighted Lebesgue, Lorentz, and Morrey norms are exact finite
sums / closed-form plateau integrals.  Orlicz and variable-exponent norms
come from a monotone modular and geometric bisection with relative bracket
width 1e-12.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np

from .errors import (
    ContractError,
    IncompatibleSpaceError,
    NumericError,
    NumericOverflowError,
    SpecFormatError,
)
from .grid import Cube, DyadicGrid, GridFunction, read_grid_function

__all__ = [
    "YoungFunction",
    "VariableExponent",
    "FunctionSpace",
    "Lebesgue",
    "WeightedLebesgue",
    "WeightedLorentz",
    "Orlicz",
    "VariableLebesgue",
    "Morrey",
    "quasi_norm",
    "weighted_rearrangement",
    "lorentz_norm",
    "modular",
    "luxemburg_norm",
    "AssociateNorm",
    "associate_norm_indicator",
    "ideal_property_probe",
    "parse_space",
]

LUXEMBURG_REL_WIDTH = 1e-12
LUXEMBURG_MAX_ITER = 200


# ---------------------------------------------------------------------------
# Young functions


class YoungFunction:
    """Convex Phi: [0, inf) -> [0, inf) with Phi(0) = 0, positive on (0, inf).

    `fn` must accept numpy arrays.  `inverse_at_one` is the t with Phi(t) = 1
    (solved by bisection when not supplied).  Convexity is spot-checked at
    construction: midpoint convexity on 64 log-spaced samples.
    """

    __slots__ = ("fn", "descriptor", "inverse_at_one")

    def __init__(
        self,
        fn: Callable[[np.ndarray], np.ndarray],
        descriptor: str,
        inverse_at_one: float | None = None,
        validate: bool = True,
        convexity_tol: float = 1e-9,
    ) -> None:
        self.fn = fn
        self.descriptor = descriptor
        if validate:
            self._validate(convexity_tol)
        if inverse_at_one is None:
            inverse_at_one = self._solve_inverse(1.0)
        self.inverse_at_one = float(inverse_at_one)

    def __call__(self, t) -> np.ndarray:
        return self.fn(np.asarray(t, dtype=np.float64))

    def __repr__(self) -> str:
        return f"YoungFunction({self.descriptor})"

    def _validate(self, tol: float) -> None:
        if abs(float(self(0.0))) > 1e-300:
            raise ValueError(f"{self.descriptor}: Phi(0) must be 0")
        t = np.geomspace(2.0**-20, 2.0**20, 64)
        with np.errstate(over="ignore"):
            vals = self(t)
            if np.any(vals[np.isfinite(vals)] <= 0.0):
                raise ValueError(f"{self.descriptor}: Phi must be positive on (0, inf)")
            mids = self((t[:-1] + t[1:]) / 2.0)
            chord = (vals[:-1] + vals[1:]) / 2.0
        ok = np.isfinite(mids) & np.isfinite(chord)
        slack = tol * np.maximum(1.0, np.abs(chord[ok]))
        if np.any(mids[ok] > chord[ok] + slack):
            raise ValueError(f"{self.descriptor}: midpoint convexity check failed")

    def _solve_inverse(self, target: float) -> float:
        lo, hi = 1.0, 1.0
        with np.errstate(over="ignore"):
            for _ in range(200):
                if float(self(lo)) < target:
                    break
                lo /= 2.0
            else:
                raise NumericError(f"{self.descriptor}: cannot bracket Phi^-1({target})")
            for _ in range(200):
                if float(self(hi)) > target:
                    break
                hi *= 2.0
            else:
                raise NumericError(f"{self.descriptor}: cannot bracket Phi^-1({target})")
            for _ in range(200):
                mid = math.sqrt(lo * hi)
                if float(self(mid)) <= target:
                    lo = mid
                else:
                    hi = mid
                if hi - lo <= 1e-14 * hi:
                    break
        return hi

    @classmethod
    def power(cls, p: float) -> "YoungFunction":
        if p < 1:
            raise ValueError(f"power Young function needs p >= 1, got {p}")
        return cls(lambda t: t**p, f"power,p={p:g}", inverse_at_one=1.0, validate=False)

    @classmethod
    def scaled_power(cls, coefficient: float, p: float) -> "YoungFunction":
        if coefficient <= 0 or p < 1:
            raise ValueError("scaled power needs coefficient > 0 and p >= 1")
        inv1 = (1.0 / coefficient) ** (1.0 / p)
        return cls(
            lambda t: coefficient * t**p,
            f"scaled_power,c={coefficient:g},p={p:g}",
            inverse_at_one=inv1,
            validate=False,
        )

    @classmethod
    def power_log(cls, p: float) -> "YoungFunction":
        if p < 1:
            raise ValueError(f"power_log Young function needs p >= 1, got {p}")
        return cls(
            lambda t: t**p * np.log(np.e + t),
            f"powerlog,p={p:g}",
            validate=False,
        )

    @classmethod
    def custom(
        cls,
        fn: Callable[[np.ndarray], np.ndarray],
        name: str = "custom",
        inverse_at_one: float | None = None,
        convexity_tol: float = 1e-9,
    ) -> "YoungFunction":
        return cls(fn, name, inverse_at_one, validate=True, convexity_tol=convexity_tol)


class VariableExponent:
    """Exponent field p(.) with 0 < p_minus <= p_plus < infinity."""

    __slots__ = ("field", "p_minus", "p_plus")

    def __init__(self, field: GridFunction) -> None:
        p_minus = float(np.min(field.values))
        p_plus = float(np.max(field.values))
        if not 0.0 < p_minus <= p_plus < math.inf:
            raise ValueError(f"exponent field must be positive, range [{p_minus}, {p_plus}]")
        self.field = field
        self.p_minus = p_minus
        self.p_plus = p_plus


# ---------------------------------------------------------------------------
# Batched Luxemburg bisection


def _batched_luxemburg(upper: np.ndarray, modular_at) -> np.ndarray:
    """inf{lam : modular(lam) <= 1} per row, by geometric bisection.

    `upper` must satisfy modular(upper) <= 1 rowwise; rows with upper == 0
    (the zero function) come back 0.  `modular_at(lam, rows)` evaluates the
    modular for the given row subset; it must be nonincreasing in lam and may
    return +inf.  Converges to relative bracket width 1e-12.
    """
    hi = np.asarray(upper, dtype=np.float64).copy()
    out = np.zeros_like(hi)
    rows = np.flatnonzero(hi > 0.0)
    if rows.size == 0:
        return out
    lo = hi[rows] / 2.0
    # Grow the bracket downward until the modular exceeds 1 on every row.
    for _ in range(LUXEMBURG_MAX_ITER):
        vals = modular_at(lo, rows)
        small = vals <= 1.0
        if not np.any(small):
            break
        lo[small] /= 4.0
    else:
        raise NumericError("Luxemburg bracketing did not terminate")
    hi_act = hi[rows].copy()
    for _ in range(LUXEMBURG_MAX_ITER):
        open_mask = hi_act > lo * (1.0 + LUXEMBURG_REL_WIDTH)
        if not np.any(open_mask):
            break
        mid = np.sqrt(lo * hi_act)
        vals = modular_at(mid[open_mask], rows[open_mask])
        below = np.zeros_like(open_mask)
        below[open_mask] = vals <= 1.0
        hi_act = np.where(open_mask & below, mid, hi_act)
        lo = np.where(open_mask & ~below, mid, lo)
    else:
        raise NumericError("Luxemburg bisection did not converge in 200 iterations")
    out[rows] = hi_act
    return out


def _luxemburg_orlicz(phi: YoungFunction, blocks: np.ndarray, cell_weight) -> np.ndarray:
    """Batched Luxemburg norm of |blocks| rows under Phi with given cell weights.

    cell_weight: scalar, or array broadcastable to blocks (cell measures).
    Total weight per row must be <= 1 so that lam = max/Phi^-1(1) brackets.
    """
    a = np.abs(blocks).reshape(blocks.shape[0], -1)
    w = np.broadcast_to(np.asarray(cell_weight, dtype=np.float64), a.shape)
    amax = a.max(axis=1)
    # tiny headroom keeps the bracket valid when inverse_at_one was solved
    # numerically (Phi(inverse_at_one) may exceed 1 by an ulp)
    upper = amax / phi.inverse_at_one * (1.0 + 1e-10)

    def modular_at(lam, rows):
        with np.errstate(over="ignore", invalid="ignore"):
            vals = phi(a[rows] / lam[:, None])
            return np.where(
                np.all(np.isfinite(vals) | (a[rows] == 0.0), axis=1),
                np.nansum(vals * w[rows], axis=1),
                np.inf,
            )

    return _batched_luxemburg(upper, modular_at)


def _luxemburg_variable(p_blocks: np.ndarray, blocks: np.ndarray, cell_weight) -> np.ndarray:
    """Batched Luxemburg norm with the variable-exponent modular."""
    a = np.abs(blocks).reshape(blocks.shape[0], -1)
    pw = p_blocks.reshape(p_blocks.shape[0], -1)
    w = np.broadcast_to(np.asarray(cell_weight, dtype=np.float64), a.shape)
    upper = a.max(axis=1)  # total weight <= 1, so (a/amax)^p <= 1 cellwise

    def modular_at(lam, rows):
        with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
            ratios = a[rows] / lam[:, None]
            vals = ratios ** pw[rows]
            return np.where(
                np.all(np.isfinite(vals) | (a[rows] == 0.0), axis=1),
                np.nansum(vals * w[rows], axis=1),
                np.inf,
            )

    return _batched_luxemburg(upper, modular_at)


# ---------------------------------------------------------------------------
# Function spaces


class FunctionSpace:
    """Common surface of the six quasi-normed lattices.

    Subclasses implement `block_norms`: given a stack of blocks (functions
    restricted to same-shaped cubes, spatial axes kept) plus matching blocks
    of any grid-valued field, return the quasi-norm of each block extended by
    zero.  `cell_volume` is the Lebesgue measure of one cell of the block.
    """

    kind: str = "abstract"

    @property
    def bound_grid(self) -> DyadicGrid | None:
        """Grid its field values live on, or None for field-free spaces."""
        return None

    @property
    def aux_field(self) -> GridFunction | None:
        """Grid-valued field (weight or exponent) windowed by batch drivers."""
        return None

    def block_norms(self, blocks: np.ndarray, aux: np.ndarray | None, cell_volume: float) -> np.ndarray:
        raise NotImplementedError

    def indicator_block_norms(
        self, side: int, count: int, aux: np.ndarray | None, cell_volume: float, dimension: int
    ) -> np.ndarray:
        """Norms of cube indicators; generic path feeds ones to block_norms."""
        ones = np.ones((count,) + (side,) * dimension)
        return self.block_norms(ones, aux, cell_volume)

    def rebind(self, grid: DyadicGrid) -> "FunctionSpace":
        """Version of this space usable on `grid` (coarser for field spaces)."""
        return self

    def describe(self) -> str:
        return self.kind


def _resample_field(f: GridFunction, grid: DyadicGrid) -> GridFunction:
    """Block-average a field down to a coarser grid over the same unit cube."""
    if grid == f.grid:
        return f
    if grid.dimension != f.grid.dimension or grid.level > f.grid.level:
        raise IncompatibleSpaceError(
            "grid-valued field can only be resampled to a coarser grid"
        )
    factor = 1 << (f.grid.level - grid.level)
    v = f.values
    if f.grid.dimension == 1:
        out = v.reshape(grid.cells_per_side, factor).mean(axis=1)
    else:
        out = v.reshape(grid.cells_per_side, factor, grid.cells_per_side, factor).mean(
            axis=(1, 3)
        )
    return GridFunction(grid, out)


def _check_weight(w: GridFunction) -> GridFunction:
    if np.any(w.values <= 0.0):
        raise ValueError("weight must be strictly positive on every cell")
    return w


@dataclass(frozen=True)
class Lebesgue(FunctionSpace):
    p: float
    kind: str = field(default="lp", init=False)

    def __post_init__(self) -> None:
        if not 1.0 <= self.p < math.inf:
            raise ValueError(f"Lebesgue exponent must be in [1, inf), got {self.p}")

    def block_norms(self, blocks, aux, cell_volume):
        a = np.abs(blocks).reshape(blocks.shape[0], -1)
        return (np.sum(a**self.p, axis=1) * cell_volume) ** (1.0 / self.p)

    def indicator_block_norms(self, side, count, aux, cell_volume, dimension):
        return np.full(count, (side**dimension * cell_volume) ** (1.0 / self.p))

    def describe(self) -> str:
        return f"lp:p={self.p:g}"


@dataclass(frozen=True)
class WeightedLebesgue(FunctionSpace):
    p: float
    weight: GridFunction
    kind: str = field(default="wlp", init=False)

    def __post_init__(self) -> None:
        if not 1.0 <= self.p < math.inf:
            raise ValueError(f"exponent must be in [1, inf), got {self.p}")
        _check_weight(self.weight)

    @property
    def bound_grid(self):
        return self.weight.grid

    @property
    def aux_field(self):
        return self.weight

    def block_norms(self, blocks, aux, cell_volume):
        a = np.abs(blocks).reshape(blocks.shape[0], -1)
        w = aux.reshape(aux.shape[0], -1)
        return (np.sum(a**self.p * w, axis=1) * cell_volume) ** (1.0 / self.p)

    def indicator_block_norms(self, side, count, aux, cell_volume, dimension):
        w = aux.reshape(aux.shape[0], -1)
        return (np.sum(w, axis=1) * cell_volume) ** (1.0 / self.p)

    def rebind(self, grid):
        return WeightedLebesgue(self.p, _resample_field(self.weight, grid))

    def describe(self) -> str:
        return f"wlp:p={self.p:g}"


@dataclass(frozen=True)
class WeightedLorentz(FunctionSpace):
    """L^{p,q}(w); weight None means Lebesgue measure (w = 1)."""

    p: float
    q: float
    weight: GridFunction | None = None
    kind: str = field(default="lorentz", init=False)

    def __post_init__(self) -> None:
        if not 0.0 < self.p < math.inf:
            raise ValueError(f"Lorentz needs 0 < p < inf, got p={self.p}")
        if not (0.0 < self.q <= math.inf):
            raise ValueError(f"Lorentz needs 0 < q <= inf, got q={self.q}")
        if self.weight is not None:
            _check_weight(self.weight)

    @property
    def bound_grid(self):
        return None if self.weight is None else self.weight.grid

    @property
    def aux_field(self):
        return self.weight

    def block_norms(self, blocks, aux, cell_volume):
        a = np.abs(blocks).reshape(blocks.shape[0], -1)
        order = np.argsort(-a, axis=1, kind="stable")
        heights = np.take_along_axis(a, order, axis=1)
        if aux is None:
            cells = a.shape[1]
            T = (np.arange(1, cells + 1) * cell_volume)[None, :]
        else:
            w = aux.reshape(aux.shape[0], -1)
            widths = np.take_along_axis(w, order, axis=1) * cell_volume
            T = np.cumsum(widths, axis=1)
        if self.q == math.inf:
            return np.max(heights * T ** (1.0 / self.p), axis=1)
        qp = self.q / self.p
        T_prev = np.concatenate([np.zeros((T.shape[0], 1)), T[:, :-1]], axis=1)
        if aux is None:
            increments = np.broadcast_to(T**qp - T_prev**qp, heights.shape)
        else:
            increments = T**qp - T_prev**qp
        integral = (self.p / self.q) * np.sum(heights**self.q * increments, axis=1)
        return integral ** (1.0 / self.q)

    def indicator_block_norms(self, side, count, aux, cell_volume, dimension):
        if aux is None:
            wq = np.full(count, side**dimension * cell_volume)
        else:
            wq = np.sum(aux.reshape(aux.shape[0], -1), axis=1) * cell_volume
        if self.q == math.inf:
            return wq ** (1.0 / self.p)
        return ((self.p / self.q) * wq ** (self.q / self.p)) ** (1.0 / self.q)

    def rebind(self, grid):
        if self.weight is None:
            return self
        return WeightedLorentz(self.p, self.q, _resample_field(self.weight, grid))

    def describe(self) -> str:
        q = "inf" if self.q == math.inf else f"{self.q:g}"
        return f"lorentz:p={self.p:g},q={q}"


@dataclass(frozen=True)
class Orlicz(FunctionSpace):
    phi: YoungFunction
    kind: str = field(default="orlicz", init=False)

    def block_norms(self, blocks, aux, cell_volume):
        return _luxemburg_orlicz(self.phi, blocks, cell_volume)

    def indicator_block_norms(self, side, count, aux, cell_volume, dimension):
        one = np.ones((1,) + (side,) * dimension)
        return np.full(count, _luxemburg_orlicz(self.phi, one, cell_volume)[0])

    def describe(self) -> str:
        return f"orlicz:{self.phi.descriptor}"


@dataclass(frozen=True)
class VariableLebesgue(FunctionSpace):
    exponent: VariableExponent
    kind: str = field(default="varlp", init=False)

    def __init__(self, exponent) -> None:
        if isinstance(exponent, GridFunction):
            exponent = VariableExponent(exponent)
        object.__setattr__(self, "exponent", exponent)

    @property
    def bound_grid(self):
        return self.exponent.field.grid

    @property
    def aux_field(self):
        return self.exponent.field

    def block_norms(self, blocks, aux, cell_volume):
        return _luxemburg_variable(aux, blocks, cell_volume)

    def rebind(self, grid):
        return VariableLebesgue(_resample_field(self.exponent.field, grid))

    def describe(self) -> str:
        return "varlp"


@dataclass(frozen=True)
class Morrey(FunctionSpace):
    p: float
    q: float
    kind: str = field(default="morrey", init=False)

    def __post_init__(self) -> None:
        if not 1.0 <= self.q <= self.p < math.inf:
            raise ValueError(f"Morrey needs 1 <= q <= p < inf, got p={self.p}, q={self.q}")

    def block_norms(self, blocks, aux, cell_volume):
        # sup over subcubes W of |W|^(1/p - 1/q) (int_W |f|^q)^(1/q).  For a
        # function vanishing outside the block the sup over all grid cubes is
        # attained at W inside the block, so scanning subwindows is exact.
        alpha = 1.0 / self.p - 1.0 / self.q
        a = np.abs(blocks) ** self.q
        dimension = a.ndim - 1
        side = a.shape[1]
        best = np.zeros(a.shape[0])
        if dimension == 1:
            P = np.concatenate([np.zeros((a.shape[0], 1)), np.cumsum(a, axis=1)], axis=1)
            for t in range(1, side + 1):
                sums = P[:, t:] - P[:, :-t]
                peak = sums.max(axis=1)
                measure = t * cell_volume
                best = np.maximum(best, measure**alpha * (peak * cell_volume) ** (1.0 / self.q))
        else:
            P = np.zeros((a.shape[0], side + 1, side + 1))
            P[:, 1:, 1:] = np.cumsum(np.cumsum(a, axis=1), axis=2)
            for t in range(1, side + 1):
                sums = (
                    P[:, t:, t:]
                    - P[:, :-t, t:]
                    - P[:, t:, :-t]
                    + P[:, :-t, :-t]
                )
                peak = sums.reshape(a.shape[0], -1).max(axis=1)
                measure = t * t * cell_volume
                best = np.maximum(best, measure**alpha * (peak * cell_volume) ** (1.0 / self.q))
        return best

    def indicator_block_norms(self, side, count, aux, cell_volume, dimension):
        return np.full(count, (side**dimension * cell_volume) ** (1.0 / self.p))

    def describe(self) -> str:
        return f"morrey:p={self.p:g},q={self.q:g}"


# ---------------------------------------------------------------------------
# Scalar operations


def _compatible_grid(space: FunctionSpace, f: GridFunction) -> None:
    bound = space.bound_grid
    if bound is not None and bound != f.grid:
        raise IncompatibleSpaceError(
            f"{space.describe()} carries fields on grid {bound}, function lives on {f.grid}"
        )


def _full_aux(space: FunctionSpace) -> np.ndarray | None:
    aux = space.aux_field
    return None if aux is None else aux.values[None, ...]


def quasi_norm(space: FunctionSpace, f: GridFunction) -> float:
    """The quasi-norm of f in the given space; 0 iff f vanishes."""
    _compatible_grid(space, f)
    out = float(
        space.block_norms(f.values[None, ...], _full_aux(space), f.grid.cell_volume)[0]
    )
    if not math.isfinite(out):
        raise NumericOverflowError(f"{space.describe()} norm overflowed")
    return out


def weighted_rearrangement(
    f: GridFunction, w: GridFunction
) -> list[tuple[float, float]]:
    """Decreasing rearrangement of |f| against the measure w dx.

    Returns plateaus as (height, width) pairs: one plateau per cell, heights
    sorted descending (ties broken by ascending cell index), width the cell's
    w-measure.  Exact.
    """
    if w.grid != f.grid:
        raise IncompatibleSpaceError("weight lives on a different grid")
    _check_weight(w)
    a = np.abs(f.flat)
    order = np.argsort(-a, kind="stable")
    heights = a[order]
    widths = w.flat[order] * f.grid.cell_volume
    return list(zip(heights.tolist(), widths.tolist()))


def lorentz_norm(p: float, q: float, w: GridFunction | None, f: GridFunction) -> float:
    """Weighted Lorentz norm via the closed-form plateau integrals."""
    if p == math.inf:
        raise ValueError("Lorentz norm with p = inf is not supported")
    return quasi_norm(WeightedLorentz(p, q, w), f)


def modular(space: FunctionSpace, f: GridFunction, lam: float) -> float:
    """Orlicz / variable-exponent modular of f at scale lam (may be +inf)."""
    if lam <= 0.0:
        raise ValueError(f"modular scale must be positive, got {lam}")
    _compatible_grid(space, f)
    v = f.grid.cell_volume
    a = np.abs(f.flat)
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        if isinstance(space, Orlicz):
            vals = space.phi(a / lam)
        elif isinstance(space, VariableLebesgue):
            vals = (a / lam) ** space.exponent.field.flat
        else:
            raise ContractError(f"modular undefined for {space.describe()}")
        if not np.all(np.isfinite(vals) | (a == 0.0)):
            return math.inf
        return float(np.nansum(vals * v))


def luxemburg_norm(space: FunctionSpace, f: GridFunction) -> float:
    """inf{lam > 0 : modular(f, lam) <= 1}; 0 for the zero function."""
    if not isinstance(space, (Orlicz, VariableLebesgue)):
        raise ContractError(f"Luxemburg norm undefined for {space.describe()}")
    return quasi_norm(space, f)


class AssociateNorm(NamedTuple):
    value: float
    certified: bool


def associate_norm_indicator(
    space: FunctionSpace, cube: Cube, sweeps: int = 500
) -> AssociateNorm:
    """||chi_Q|| in the associate space: sup of int_Q g over the unit ball.

    Closed forms (Hoelder extremals) for Lebesgue and weighted Lebesgue are
    certified.  Every other variant gets a deterministic coordinate-ascent
    lower bound starting from the normalized indicator; those values carry
    certified=False.
    """
    grid = cube.grid
    if isinstance(space, Lebesgue):
        conj = 0.0 if space.p == 1.0 else 1.0 - 1.0 / space.p
        return AssociateNorm(cube.measure**conj, True)
    if isinstance(space, WeightedLebesgue):
        _compatible_grid_cube(space, cube)
        w_block = space.weight.values[cube.slices]
        if space.p == 1.0:
            return AssociateNorm(float(1.0 / np.min(w_block)), True)
        conj = space.p / (space.p - 1.0)
        integral = float(np.sum(w_block ** (1.0 - conj)) * grid.cell_volume)
        return AssociateNorm(integral ** (1.0 / conj), True)
    return AssociateNorm(_ascent_lower_bound(space, cube, sweeps), False)


def _compatible_grid_cube(space: FunctionSpace, cube: Cube) -> None:
    bound = space.bound_grid
    if bound is not None and bound != cube.grid:
        raise IncompatibleSpaceError("cube and space fields live on different grids")


_ASCENT_FACTORS = (4.0, 2.0, 1.25, 0.8, 0.5, 0.25)


def _ascent_lower_bound(space: FunctionSpace, cube: Cube, sweeps: int) -> float:
    """Maximize int_Q g / ||g||_X over g >= 0 supported on Q, coordinatewise."""
    _compatible_grid_cube(space, cube)
    grid = cube.grid
    v = grid.cell_volume
    aux = _full_aux(space)

    def objective(values: np.ndarray) -> float:
        norm = float(space.block_norms(values[None, ...], aux, v)[0])
        if norm == 0.0:
            return 0.0
        return float(np.sum(values[cube.slices]) * v / norm)

    g = np.zeros(grid.shape)
    g[cube.slices] = 1.0
    best = objective(g)
    cells = [tuple(idx) for idx in np.argwhere(g > 0)]
    for _ in range(sweeps):
        start = best
        for cell in cells:
            base = g[cell]
            for factor in _ASCENT_FACTORS:
                g[cell] = base * factor
                trial = objective(g)
                if trial > best:
                    best = trial
                    base = g[cell]
                else:
                    g[cell] = base
        if best - start <= 1e-10 * max(best, 1e-300):
            break
    return best


def ideal_property_probe(space: FunctionSpace, f: GridFunction, g: GridFunction) -> bool:
    """Check the lattice property ||g|| <= ||f|| for a dominated pair |g| <= |f|."""
    if g.grid != f.grid:
        raise ContractError("dominated pair must share a grid")
    if np.any(np.abs(g.values) > np.abs(f.values)):
        raise ContractError("|g| <= |f| must hold cellwise")
    return quasi_norm(space, g) <= quasi_norm(space, f) * (1.0 + 1e-9)


# ---------------------------------------------------------------------------
# Space descriptor strings (CLI surface)


def parse_space(text: str, loader=read_grid_function) -> FunctionSpace:
    """Build a space from its descriptor string.

    Formats: lp:p=2 | wlp:p=2,w=FILE | lorentz:p=2,q=1[,w=FILE] |
    orlicz:power,p=2 | orlicz:powerlog,p=2 | varlp:p=FILE | morrey:p=4,q=2.
    FILE arguments are grid-function text files resolved through `loader`.
    """
    text = text.strip()
    kind, _, rest = text.partition(":")
    kind = kind.lower()
    args: dict[str, str] = {}
    tags: list[str] = []
    if rest:
        for part in rest.split(","):
            part = part.strip()
            if not part:
                continue
            if "=" in part:
                key, _, value = part.partition("=")
                args[key.strip()] = value.strip()
            else:
                tags.append(part)
    try:
        if kind == "lp":
            return Lebesgue(float(args["p"]))
        if kind == "wlp":
            return WeightedLebesgue(float(args["p"]), loader(args["w"]))
        if kind == "lorentz":
            q = math.inf if args["q"].lower() in ("inf", "infinity") else float(args["q"])
            w = loader(args["w"]) if "w" in args else None
            return WeightedLorentz(float(args["p"]), q, w)
        if kind == "orlicz":
            if not tags:
                raise KeyError("young function tag")
            tag = tags[0].lower()
            if tag == "power":
                return Orlicz(YoungFunction.power(float(args["p"])))
            if tag == "powerlog":
                return Orlicz(YoungFunction.power_log(float(args["p"])))
            raise KeyError(f"unknown young function tag {tag!r}")
        if kind == "varlp":
            return VariableLebesgue(loader(args["p"]))
        if kind == "morrey":
            return Morrey(float(args["p"]), float(args["q"]))
    except (KeyError, ValueError) as exc:
        raise SpecFormatError(f"bad space descriptor {text!r}: {exc}") from exc
    raise SpecFormatError(f"unknown space kind {kind!r} in {text!r}")
