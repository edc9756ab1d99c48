import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oscnorm.errors import ContractError, UnsupportedCubeError
from oscnorm.grid import Cube, DyadicGrid, GridFunction
from oscnorm.sparse import SparseFamily, cz_sparse, domination_constant, sparse_majorant


def gf(level, values, dimension=1):
    return GridFunction(DyadicGrid(dimension, level), values)


def dyadic_values(rng, size, quantum=2**-20, scale=8.0):
    """Random cell values on a binary-rational lattice (exact affine images exist)."""
    return rng.integers(-int(scale / quantum), int(scale / quantum), size) * quantum


class TestCzSparse:
    def test_constant_single_entry(self):
        f = gf(2, [5, 5, 5, 5])
        fam = cz_sparse(f, f.grid.base_cube())
        assert len(fam) == 1
        entry = fam.entries[0]
        assert entry.cube == f.grid.base_cube()
        assert entry.mean_oscillation == 0.0
        assert list(entry.owned_cells) == [0, 1, 2, 3]

    def test_worked_trace(self):
        f = gf(2, [0, 0, 0, 8])
        fam = cz_sparse(f, f.grid.base_cube(), alpha=2.0)
        assert len(fam) == 1
        assert fam.entries[0].mean_oscillation == 3.0
        assert list(fam.entries[0].owned_cells) == [0, 1, 2, 3]

    def test_invariants_on_seeded_functions(self):
        grid = DyadicGrid(1, 5)
        root = grid.base_cube()
        for seed in range(100):
            rng = np.random.default_rng(seed)
            f = GridFunction(grid, rng.normal(size=32) * rng.uniform(0.1, 20))
            fam = cz_sparse(f, root)
            fam.validate()
            assert fam.total_owned_cells() <= root.cell_count

    def test_invariants_2d(self):
        grid = DyadicGrid(2, 3)
        root = grid.base_cube()
        for seed in range(25):
            rng = np.random.default_rng(seed)
            f = GridFunction(grid, rng.normal(size=64))
            cz_sparse(f, root).validate()

    def test_subcube_root(self):
        grid = DyadicGrid(1, 4)
        rng = np.random.default_rng(3)
        f = GridFunction(grid, rng.normal(size=16))
        root = Cube(grid, 4, 8)
        fam = cz_sparse(f, root)
        fam.validate()
        owned = np.concatenate([e.owned_cells for e in fam.entries])
        assert set(owned.tolist()) <= set(root.flat_indices().tolist())

    def test_non_power_of_two_root_rejected(self):
        grid = DyadicGrid(1, 2)
        f = gf(2, [1, 2, 3, 4])
        with pytest.raises(UnsupportedCubeError):
            cz_sparse(f, Cube(grid, 0, 3))

    def test_alpha_below_two_rejected(self):
        f = gf(2, [1, 2, 3, 4])
        with pytest.raises(ValueError):
            cz_sparse(f, f.grid.base_cube(), alpha=1.5)

    def test_affine_invariance_exact(self):
        # exactly representable affine images must give identical families
        grid = DyadicGrid(1, 6)
        root = grid.base_cube()
        for seed in range(50):
            rng = np.random.default_rng(seed)
            vals = dyadic_values(rng, 64)
            f = GridFunction(grid, vals)
            base = cz_sparse(f, root)
            for a, b in [(1.5, 0.625), (3.0, -2.25), (2.0, 0.0), (0.5, 7.0)]:
                other = cz_sparse(GridFunction(grid, a * vals + b), root)
                assert len(other) == len(base)
                for e1, e2 in zip(base.entries, other.entries):
                    assert e1.cube == e2.cube
                    assert np.array_equal(e1.owned_cells, e2.owned_cells)

    def test_scale_invariance_power_of_two_any_values(self):
        # multiplying by a power of two is exact for every float input
        grid = DyadicGrid(1, 5)
        root = grid.base_cube()
        rng = np.random.default_rng(11)
        vals = rng.normal(size=32) * 13.7
        base = cz_sparse(GridFunction(grid, vals), root)
        quad = cz_sparse(GridFunction(grid, 4.0 * vals), root)
        assert [e.cube for e in base.entries] == [e.cube for e in quad.entries]

    def test_nontrivial_decomposition_has_multiple_entries(self):
        vals = np.zeros(64)
        vals[0] = 4096.0  # violent spike forces stopping cubes
        f = gf(6, vals)
        fam = cz_sparse(f, f.grid.base_cube())
        fam.validate()
        assert len(fam) > 1


class TestSparseMajorant:
    def test_constant_zero(self):
        f = gf(2, [5, 5, 5, 5])
        fam = cz_sparse(f, f.grid.base_cube())
        assert not np.any(sparse_majorant(fam, f).values)

    def test_worked_value(self):
        f = gf(2, [0, 0, 0, 8])
        fam = cz_sparse(f, f.grid.base_cube())
        assert np.all(sparse_majorant(fam, f).values == 3.0)

    def test_nonnegative(self):
        rng = np.random.default_rng(5)
        f = gf(5, rng.normal(size=32))
        fam = cz_sparse(f, f.grid.base_cube())
        assert np.all(sparse_majorant(fam, f).values >= 0.0)


class TestDominationConstant:
    def test_constant_function(self):
        f = gf(2, [5, 5, 5, 5])
        assert domination_constant(f, f.grid.base_cube()) == 0.0

    def test_worked_value(self):
        f = gf(2, [0, 0, 0, 8])
        assert domination_constant(f, f.grid.base_cube(), alpha=2.0) == 2.0

    def test_finite_on_random_and_all_alphas(self):
        grid = DyadicGrid(1, 5)
        root = grid.base_cube()
        for seed in range(40):
            rng = np.random.default_rng(seed)
            f = GridFunction(grid, rng.normal(size=32) * 5)
            for alpha in (2.0, 3.0, 4.0):
                assert math.isfinite(domination_constant(f, root, alpha))

    def test_refinement_stability_log_function(self):
        # sampled log|x - 0| stays dominated with a comparable constant as
        # the grid refines
        consts = []
        for level in (4, 6):
            grid = DyadicGrid(1, level)
            centers = grid.cell_centers()[:, 0]
            f = GridFunction(grid, np.log(centers))
            consts.append(domination_constant(f, grid.base_cube()))
        assert all(math.isfinite(c) for c in consts)
        assert consts[1] <= consts[0] * 3.0


@settings(max_examples=60, deadline=None)
@given(
    st.lists(st.integers(-2**20, 2**20), min_size=16, max_size=16),
    st.sampled_from([2.0, 2.5, 3.0, 4.0]),
)
def test_family_invariants_property(raw, alpha):
    grid = DyadicGrid(1, 4)
    f = GridFunction(grid, np.array(raw) * 2.0**-10)
    fam = cz_sparse(f, grid.base_cube(), alpha)
    fam.validate()
    assert math.isfinite(domination_constant(f, grid.base_cube(), alpha))
