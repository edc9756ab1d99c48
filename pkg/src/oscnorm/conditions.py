"""Checkers for the hypotheses the norm equivalences rest on.

Each checker scans a deterministic sample family (cubes of a grid, log-spaced
scales, subsets of a cube) for the worst constant in an inequality and
reports it together with a witness that reproduces the constant.  None of
them proves membership in the continuum classes; on a finite grid every
constant is finite, so what matters is the size of the constant and how it
moves under refinement.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field as dataclass_field
from fractions import Fraction
from typing import Callable

import numpy as np

from .errors import ContractError, NumericError, UndefinedRatioError
from .grid import Cube, DyadicGrid, GridFunction, average, enumerate_cubes, indicator
from .spaces import (
    FunctionSpace,
    YoungFunction,
    VariableExponent,
    associate_norm_indicator,
    quasi_norm,
)

__all__ = [
    "PhiParameter",
    "ConditionReport",
    "ax_product_ratio",
    "ax_lerner_ratio",
    "ap_constant",
    "ap1_constant",
    "ap1_constant_exhaustive",
    "young_delta2_constant",
    "young_nabla2_constant",
    "default_young_sample",
    "phi_theta",
    "phi_regularity",
    "log_holder_constants",
    "check_ax",
    "check_ap",
    "check_ap1",
    "check_young_delta2",
    "check_young_nabla2",
    "check_phi_regularity",
    "check_log_holder",
    "parse_phi",
]


# ---------------------------------------------------------------------------
# The oscillation weight phi(x, r)


class PhiParameter:
    """Positive weight phi(x, r) evaluated at cube centers and half side lengths.

    For a cube Q the convention is phi(Q) = phi(center(Q), side(Q)/2).  The
    `power` constructor uses phi(x, r) = (2r)^-theta so that phi(Q) equals
    side(Q)^-theta exactly.
    """

    __slots__ = ("fn", "descriptor")

    def __init__(self, fn: Callable[[np.ndarray, np.ndarray], np.ndarray], descriptor: str):
        self.fn = fn
        self.descriptor = descriptor

    def __call__(self, x, r) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=np.float64))
        r = np.asarray(r, dtype=np.float64)
        out = np.asarray(self.fn(x, r), dtype=np.float64)
        if np.any(out <= 0.0) or not np.all(np.isfinite(out)):
            raise ValueError(f"phi {self.descriptor!r} must be positive and finite")
        return out

    def at_cubes(self, grid: DyadicGrid, side_cells: int, corners: np.ndarray) -> np.ndarray:
        """phi(Q) for all cubes of one side length; corners is (m, n) integer."""
        h = grid.cell_side
        centers = (corners + side_cells / 2.0) * h
        radii = np.full(centers.shape[0], side_cells * h / 2.0)
        return self(centers, radii)

    def at_cube(self, cube: Cube) -> float:
        corners = np.asarray([cube.corner])
        return float(self.at_cubes(cube.grid, cube.side_cells, corners)[0])

    @classmethod
    def constant(cls, value: float = 1.0) -> "PhiParameter":
        if value <= 0:
            raise ValueError("constant phi must be positive")
        return cls(lambda x, r: np.full(x.shape[0], value), f"const:{value:g}")

    @classmethod
    def power(cls, theta: float) -> "PhiParameter":
        return cls(lambda x, r: (2.0 * r) ** -theta, f"power:{theta:g}")

    @classmethod
    def custom(cls, fn, name: str = "custom") -> "PhiParameter":
        return cls(fn, name)


def parse_phi(text: str) -> PhiParameter:
    """Descriptor strings for the CLI: "const" or "power:<theta>"."""
    text = text.strip().lower()
    if text in ("const", "const:1", "1"):
        return PhiParameter.constant()
    if text.startswith("const:"):
        return PhiParameter.constant(float(text.split(":", 1)[1]))
    if text.startswith("power:"):
        return PhiParameter.power(float(text.split(":", 1)[1]))
    from .errors import SpecFormatError

    raise SpecFormatError(f"unknown phi descriptor {text!r}")


@dataclass
class ConditionReport:
    """Worst constant found for a named condition plus its witness."""

    condition: str
    constant: float
    witness: dict
    budget: int | None = None
    samples: int = 0
    threshold: float | None = None
    extra: dict = dataclass_field(default_factory=dict)

    def to_dict(self) -> dict:
        out = {
            "condition": self.condition,
            "constant": self.constant,
            "witness": self.witness,
            "budget": self.budget,
            "samples": self.samples,
        }
        if self.threshold is not None:
            out["threshold"] = self.threshold
        out.update(self.extra)
        return out


def _cube_key(cube: Cube) -> dict:
    return {"corner": list(cube.corner), "side_cells": cube.side_cells}


# ---------------------------------------------------------------------------
# Indicator-product condition and its Lerner form


def ax_product_ratio(space: FunctionSpace, cube: Cube) -> float:
    """||chi_Q||_X * ||chi_Q||_X' / |Q| for one cube."""
    chi = quasi_norm(space, indicator(cube))
    assoc = associate_norm_indicator(space, cube)
    return chi * assoc.value / cube.measure


def check_ax(space: FunctionSpace, grid: DyadicGrid) -> ConditionReport:
    """Max of the indicator-product ratio over every cube of the grid."""
    best, witness, certified, count = -math.inf, None, True, 0
    for cube in enumerate_cubes(grid):
        chi = quasi_norm(space, indicator(cube))
        assoc = associate_norm_indicator(space, cube)
        certified = certified and assoc.certified
        ratio = chi * assoc.value / cube.measure
        count += 1
        if ratio > best:
            best, witness = ratio, cube
    return ConditionReport(
        condition="indicator_product",
        constant=best,
        witness=_cube_key(witness),
        samples=count,
        extra={"certified": certified, "space": space.describe()},
    )


def ax_lerner_ratio(space: FunctionSpace, f: GridFunction, cube: Cube) -> float:
    """(|f|_Q * ||chi_Q||_X) / ||f chi_Q||_X."""
    restricted = f * indicator(cube)
    denom = quasi_norm(space, restricted)
    if denom == 0.0:
        raise UndefinedRatioError("f vanishes on the cube")
    return average(abs(f), cube) * quasi_norm(space, indicator(cube)) / denom


# ---------------------------------------------------------------------------
# Weight classes


def ap_constant(w: GridFunction, p: float) -> float:
    """Max over cubes of (mean of w) * (mean of w^(1-p'))^(p-1), p > 1."""
    if not p > 1.0:
        raise ValueError(f"need p > 1, got {p}")
    if np.any(w.values <= 0.0):
        raise ValueError("weight must be strictly positive")
    dual_exponent = 1.0 - p / (p - 1.0)
    u = w.values**dual_exponent
    best = -math.inf
    for cube in enumerate_cubes(w.grid):
        block_w = w.values[cube.slices]
        block_u = u[cube.slices]
        k = block_w.size
        val = (np.sum(block_w) / k) * (np.sum(block_u) / k) ** (p - 1.0)
        best = max(best, float(val))
    return best


def check_ap(w: GridFunction, p: float) -> ConditionReport:
    dual_exponent = 1.0 - p / (p - 1.0)
    u = w.values**dual_exponent
    best, witness, count = -math.inf, None, 0
    for cube in enumerate_cubes(w.grid):
        k = cube.cell_count
        val = float(
            (np.sum(w.values[cube.slices]) / k)
            * (np.sum(u[cube.slices]) / k) ** (p - 1.0)
        )
        count += 1
        if val > best:
            best, witness = val, cube
    return ConditionReport(
        condition="muckenhoupt_ap",
        constant=best,
        witness=_cube_key(witness),
        samples=count,
        extra={"p": p},
    )


def _subset_ratio(k: int, K: int, wE: float, wQ: float, p: float) -> float:
    return (k / K) / (wE / wQ) ** (1.0 / p)


def ap1_constant(
    w: GridFunction,
    p: float,
    subset_budget: int = 64,
    seed: int = 0,
    return_witness: bool = False,
):
    """Worst (|E|/|Q|) / (w(E)/w(Q))^(1/p) over cubes Q and subsets E of Q.

    Candidate subsets per cube: the k cells of smallest weight for every k
    (these contain the exact optimum: at fixed size, the ratio grows as w(E)
    shrinks) plus `subset_budget` seeded random subsets.
    """
    if p < 1.0:
        raise ValueError(f"need p >= 1, got {p}")
    if np.any(w.values <= 0.0):
        raise ValueError("weight must be strictly positive")
    rng = np.random.default_rng(seed)
    best, witness = -math.inf, None
    for cube in enumerate_cubes(w.grid):
        block = w.values[cube.slices].reshape(-1)
        K = block.size
        wQ = float(np.sum(block))
        order = np.argsort(block, kind="stable")
        prefix = np.cumsum(block[order])
        ks = np.arange(1, K + 1)
        ratios = (ks / K) / (prefix / wQ) ** (1.0 / p)
        idx = int(np.argmax(ratios))
        if ratios[idx] > best:
            best = float(ratios[idx])
            cells = cube.flat_indices()[order[: idx + 1]]
            witness = (cube, np.sort(cells))
        if subset_budget > 0 and K > 1:
            masks = rng.integers(0, 2, size=(subset_budget, K), dtype=np.int8).astype(bool)
            sizes = masks.sum(axis=1)
            keep = sizes > 0
            if np.any(keep):
                masks, sizes = masks[keep], sizes[keep]
                wE = masks @ block
                rr = (sizes / K) / (wE / wQ) ** (1.0 / p)
                j = int(np.argmax(rr))
                if rr[j] > best:
                    best = float(rr[j])
                    cells = cube.flat_indices()[np.flatnonzero(masks[j])]
                    witness = (cube, np.sort(cells))
    if return_witness:
        return best, witness
    return best


def ap1_constant_exhaustive(w: GridFunction, p: float, max_cells: int = 16) -> float:
    """Literal enumeration of every nonempty subset, for cubes up to max_cells.

    The independent oracle for the sampled search; exponential, so only small
    cubes are admitted.
    """
    if max_cells > 20:
        raise ValueError("exhaustive subset search beyond 2^20 is not sensible")
    best = -math.inf
    for cube in enumerate_cubes(w.grid):
        K = cube.cell_count
        if K > max_cells:
            continue
        block = w.values[cube.slices].reshape(-1)
        wQ = float(np.sum(block))
        ids = np.arange(1, 1 << K, dtype=np.uint32)
        masks = ((ids[:, None] >> np.arange(K)) & 1).astype(bool)
        sizes = masks.sum(axis=1)
        wE = masks @ block
        ratios = (sizes / K) / (wE / wQ) ** (1.0 / p)
        best = max(best, float(np.max(ratios)))
    return best


def check_ap1(w: GridFunction, p: float, subset_budget: int = 64, seed: int = 0) -> ConditionReport:
    constant, witness = ap1_constant(w, p, subset_budget, seed, return_witness=True)
    cube, cells = witness
    return ConditionReport(
        condition="lorentz_weak_weight",
        constant=constant,
        witness={**_cube_key(cube), "subset_cells": cells.tolist()},
        budget=subset_budget,
        samples=sum(1 for _ in enumerate_cubes(w.grid)),
        extra={"p": p},
    )


# ---------------------------------------------------------------------------
# Young function growth conditions


def default_young_sample() -> np.ndarray:
    """Log-spaced scales, 64 per decade across [2^-20, 2^20]."""
    decades = 40.0 * math.log10(2.0)
    return np.geomspace(2.0**-20, 2.0**20, int(round(decades * 64)) + 1)


def young_delta2_constant(phi: YoungFunction, sample: np.ndarray | None = None) -> float:
    """Max of Phi(2r)/Phi(r) over the sample; +inf signals doubling failure."""
    r = default_young_sample() if sample is None else np.asarray(sample)
    with np.errstate(over="ignore"):
        lo = phi(r)
        hi = phi(2.0 * r)
    if np.any(lo == 0.0):
        raise ValueError("Phi vanishes at a positive point: not a Young function")
    with np.errstate(invalid="ignore"):
        ratios = hi / lo
    ratios = np.where(np.isnan(ratios), np.inf, ratios)  # inf/inf tails count as blow-up
    return float(np.max(ratios))


def delta2_decade_profile(phi: YoungFunction) -> list[tuple[float, float]]:
    """Per-decade maxima of the doubling ratio, for divergence reporting."""
    sample = default_young_sample()
    decades = np.floor(np.log10(sample))
    out = []
    with np.errstate(over="ignore", invalid="ignore"):
        ratios = phi(2.0 * sample) / phi(sample)
    ratios = np.where(np.isnan(ratios), np.inf, ratios)
    for d in np.unique(decades):
        mask = decades == d
        out.append((float(d), float(np.max(ratios[mask]))))
    return out


_NABLA2_GRID = np.unique(
    np.concatenate([np.geomspace(1.01, 64.0, 241), [2.0, 4.0, 8.0, 16.0, 32.0, 64.0]])
)


def young_nabla2_constant(
    phi: YoungFunction, sample: np.ndarray | None = None
) -> float | None:
    """Smallest k in a fixed grid with 2k Phi(r) <= Phi(kr) on the sample, or None."""
    r = default_young_sample() if sample is None else np.asarray(sample)
    with np.errstate(over="ignore"):
        base = phi(r)
    if np.any(base == 0.0):
        raise ValueError("Phi vanishes at a positive point: not a Young function")
    for k in _NABLA2_GRID:
        with np.errstate(over="ignore", invalid="ignore"):
            scaled = phi(k * r)
            worst = np.max(np.where(np.isfinite(scaled), 2.0 * k * base / scaled, 0.0))
        if worst <= 1.0 + 1e-12:
            return float(k)
    return None


def check_young_delta2(phi: YoungFunction) -> ConditionReport:
    profile = delta2_decade_profile(phi)
    constant = young_delta2_constant(phi)
    maxima = [m for _, m in profile]
    diverging = all(a <= b for a, b in zip(maxima, maxima[1:])) and maxima[-1] > 4.0 * maxima[0]
    return ConditionReport(
        condition="young_doubling",
        constant=constant,
        witness={"scale": "log-spaced sample"},
        samples=default_young_sample().size,
        extra={
            "young": phi.descriptor,
            "grows_across_decades": bool(diverging),
            "decade_maxima": profile,
        },
    )


def check_young_nabla2(phi: YoungFunction) -> ConditionReport:
    k = young_nabla2_constant(phi)
    return ConditionReport(
        condition="young_nabla2",
        constant=math.nan if k is None else k,
        witness={"found": k is not None},
        samples=default_young_sample().size,
        extra={"young": phi.descriptor},
    )


# ---------------------------------------------------------------------------
# The integral-regularized Young function


class _YoungIntegralTable:
    """I(T) = integral of Phi(s)/s over (0, T], tabulated on log-spaced knots.

    Segment integrals use composite Simpson in log coordinates, refined until
    the relative change drops below 1e-8.  Below the lowest knot the
    integrand is nearly its limit slope, so the tail contributes at most
    Phi(t_min), which the knot range makes negligible.
    """

    KNOTS_PER_OCTAVE = 4
    LOW_EXP, HIGH_EXP = -120, 80
    REL_TOL = 1e-8

    def __init__(self, phi: YoungFunction) -> None:
        self.phi = phi
        k = np.arange(
            self.LOW_EXP * self.KNOTS_PER_OCTAVE, self.HIGH_EXP * self.KNOTS_PER_OCTAVE + 1
        )
        self.knots = 2.0 ** (k / self.KNOTS_PER_OCTAVE)
        segments = [
            self._segment(self.knots[i], self.knots[i + 1])
            for i in range(len(self.knots) - 1)
        ]
        self.prefix = np.concatenate([[0.0], np.cumsum(segments)])

    def _segment(self, a: float, b: float, panels: int = 8) -> float:
        value = self._simpson(a, b, panels)
        for _ in range(12):
            refined = self._simpson(a, b, panels * 2)
            if abs(refined - value) <= self.REL_TOL * max(abs(refined), 1e-300):
                return refined
            value, panels = refined, panels * 2
        raise NumericError("quadrature for the integral-regularized Young function stalled")

    def _simpson(self, a: float, b: float, panels: int) -> float:
        # substitute s = e^u: integral of Phi(e^u) du over [ln a, ln b]
        u = np.linspace(math.log(a), math.log(b), 2 * panels + 1)
        vals = self.phi(np.exp(u))
        h = (u[-1] - u[0]) / (2 * panels)
        return float(h / 3.0 * (vals[0] + vals[-1] + 4 * vals[1:-1:2].sum() + 2 * vals[2:-2:2].sum()))

    def __call__(self, T: float) -> float:
        if T <= 0.0:
            return 0.0
        if T < self.knots[0]:
            # integrand Phi(s)/s is nondecreasing, so the piece is below Phi(T)
            return float(self.phi(T))
        if T > self.knots[-1]:
            raise NumericError(f"argument {T} beyond the tabulated range")
        i = int(np.searchsorted(self.knots, T, side="right") - 1)
        if self.knots[i] == T:
            return float(self.prefix[i])
        return float(self.prefix[i] + self._segment(self.knots[i], T))


def phi_theta(phi: YoungFunction, theta: float) -> YoungFunction:
    """The Young function t -> integral of Phi(s)/s over (0, t^theta].

    Power inputs get the closed form t^(theta p)/p; anything else goes
    through adaptive Simpson quadrature on a cached knot table.
    """
    if theta < 1.0:
        raise ValueError(f"need theta >= 1, got {theta}")
    if phi.descriptor.startswith("power,"):
        p = float(phi.descriptor.split("=", 1)[1])
        return YoungFunction.scaled_power(1.0 / p, theta * p)
    table = _YoungIntegralTable(phi)

    def evaluate(t: np.ndarray) -> np.ndarray:
        arr = np.asarray(t, dtype=np.float64)
        flat = np.atleast_1d(arr).ravel()
        with np.errstate(over="ignore"):
            powers = flat**theta
        out = np.array([table(x) if math.isfinite(x) else math.inf for x in powers])
        return out.reshape(arr.shape) if arr.shape else out[0]

    return YoungFunction(
        evaluate,
        f"integral({phi.descriptor},theta={theta:g})",
        validate=True,
        convexity_tol=1e-6,  # quadrature noise sits above the generic 1e-9
    )


# ---------------------------------------------------------------------------
# Regularity of phi and of variable exponents


def _distinct_cube_centers(grid: DyadicGrid) -> np.ndarray:
    """All distinct cube centers of the grid, (m, n)."""
    limit = grid.cells_per_side
    # center coordinate * 2N ranges over the integers side..2N-side per axis
    axis = np.arange(1, 2 * limit) / (2.0 * limit)
    if grid.dimension == 1:
        return axis[:, None]
    xx, yy = np.meshgrid(axis, axis, indexing="ij")
    return np.column_stack([xx.ravel(), yy.ravel()])


def phi_regularity(phi: PhiParameter, grid: DyadicGrid) -> tuple[float, float]:
    """(almost-decreasing constant, spatial comparability constant).

    Samples: every distinct cube center, dyadic radii 2^-1 .. 2^-(L+1).
    Almost-decreasing: worst phi(x, r)/phi(x, s) over r >= s.  Comparability:
    worst two-sided ratio phi(x, r)/phi(y, r) over center pairs |x - y| <= r.
    """
    centers = _distinct_cube_centers(grid)
    radii = 2.0 ** -np.arange(1, grid.level + 2)  # descending
    values = np.column_stack([phi(centers, np.full(len(centers), r)) for r in radii])
    almost_dec = 1.0
    for i in range(len(radii)):
        for j in range(i, len(radii)):  # radii[i] >= radii[j]
            almost_dec = max(almost_dec, float(np.max(values[:, i] / values[:, j])))
    comparability = 1.0
    chunk = 512
    for start in range(0, len(centers), chunk):
        xs = centers[start : start + chunk]
        dist = np.sqrt(((xs[:, None, :] - centers[None, :, :]) ** 2).sum(-1))
        for ridx, r in enumerate(radii):
            mask = dist <= r
            col = values[start : start + chunk, ridx][:, None]
            row = values[:, ridx][None, :]
            ratio = np.where(mask, col / row, 1.0)
            comparability = max(
                comparability,
                float(np.max(ratio)),
                float(np.max(np.where(mask, row / col, 1.0))),
            )
    return almost_dec, comparability


def check_phi_regularity(phi: PhiParameter, grid: DyadicGrid) -> ConditionReport:
    almost_dec, comparability = phi_regularity(phi, grid)
    return ConditionReport(
        condition="phi_regularity",
        constant=max(almost_dec, comparability),
        witness={"almost_decreasing": almost_dec, "comparability": comparability},
        samples=len(_distinct_cube_centers(grid)),
        extra={"phi": phi.descriptor},
    )


def log_holder_constants(p: VariableExponent) -> tuple[float, float]:
    """(local log-Hoelder constant, decay-at-infinity constant).

    Local: worst |p(x) - p(y)| * (-log|x - y|) over cell-center pairs closer
    than 1/2.  At-infinity: worst |p(x) - p_ref| * log(e + |x|) against the
    value at the cell holding the base-cube center; nearly vacuous on a
    bounded domain, reported for completeness only.
    """
    grid = p.field.grid
    centers = grid.cell_centers()
    vals = p.field.flat
    lh0 = 0.0
    chunk = 1024
    m = len(centers)
    for start in range(0, m, chunk):
        xs = centers[start : start + chunk]
        diff = xs[:, None, :] - centers[None, :, :]
        dist = np.sqrt((diff**2).sum(-1))
        gaps = np.abs(vals[start : start + chunk, None] - vals[None, :])
        mask = (dist > 0.0) & (dist < 0.5)
        if np.any(mask):
            lh0 = max(lh0, float(np.max(gaps[mask] * (-np.log(dist[mask])))))
    mid_cell = (grid.cells_per_side // 2,) * grid.dimension
    p_ref = float(p.field.values[mid_cell])
    lh_inf = float(np.max(np.abs(vals - p_ref) * np.log(np.e + np.sqrt((centers**2).sum(-1)))))
    return lh0, lh_inf


def check_log_holder(p: VariableExponent) -> ConditionReport:
    lh0, lh_inf = log_holder_constants(p)
    return ConditionReport(
        condition="log_holder",
        constant=lh0,
        witness={"local": lh0, "at_infinity": lh_inf},
        samples=p.field.grid.cell_count,
        extra={"at_infinity_excluded_from_pass_fail": True},
    )
