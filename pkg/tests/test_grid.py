import io

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oscnorm.errors import (
    InvalidCubeError,
    SpecFormatError,
    UnsupportedCubeError,
    UnsupportedDilationError,
)
from oscnorm.grid import (
    Cube,
    DyadicGrid,
    GridFunction,
    average,
    cube_count,
    dilate,
    dyadic_descendants,
    enumerate_cubes,
    indicator,
    oscillation,
    read_grid_function,
    rescale_to_unit,
    write_grid_function,
)


def gf(level, values, dimension=1):
    return GridFunction(DyadicGrid(dimension, level), values)


class TestTypes:
    def test_grid_cell_counts(self):
        assert DyadicGrid(1, 3).cell_count == 8
        assert DyadicGrid(2, 3).cell_count == 64
        assert DyadicGrid(2, 1).shape == (2, 2)

    def test_cell_side_exact(self):
        g = DyadicGrid(1, 5)
        assert g.cell_side == 2.0**-5
        assert g.cell_volume == 2.0**-5

    def test_bad_dimension_rejected(self):
        with pytest.raises(ValueError):
            DyadicGrid(3, 2)

    def test_cube_out_of_bounds(self):
        g = DyadicGrid(1, 2)
        with pytest.raises(InvalidCubeError):
            Cube(g, 3, 2)
        with pytest.raises(InvalidCubeError):
            Cube(g, -1, 1)
        with pytest.raises(InvalidCubeError):
            Cube(g, 0, 0)

    def test_cube_geometry(self):
        g = DyadicGrid(2, 2)
        q = Cube(g, (1, 2), 2)
        assert q.side_length == 0.5
        assert q.measure == 0.25
        assert q.center() == (0.5, 0.75)
        assert sorted(q.flat_indices()) == [6, 7, 10, 11]

    def test_grid_function_rejects_nan(self):
        with pytest.raises(ValueError):
            gf(1, [1.0, np.nan])
        with pytest.raises(ValueError):
            gf(1, [1.0, np.inf])

    def test_grid_function_rejects_wrong_size(self):
        with pytest.raises(ValueError):
            gf(2, [1.0, 2.0])

    def test_grid_function_immutable(self):
        f = gf(1, [1.0, 2.0])
        with pytest.raises((ValueError, AttributeError)):
            f.values[0] = 5.0


class TestIndicator:
    def test_half_interval(self):
        g = DyadicGrid(1, 1)
        assert list(indicator(Cube(g, 0, 1)).flat) == [1.0, 0.0]

    def test_full_cube(self):
        g = DyadicGrid(1, 2)
        assert list(indicator(Cube(g, 0, 4)).flat) == [1.0, 1.0, 1.0, 1.0]

    def test_2d_quadrant(self):
        g = DyadicGrid(2, 1)
        chi = indicator(Cube(g, (0, 0), 1))
        assert chi.values[0, 0] == 1.0
        assert chi.flat.sum() == 1.0


class TestAverage:
    def test_full_interval(self):
        f = gf(2, [1, 3, 5, 7])
        assert average(f, Cube(f.grid, 0, 4)) == 4.0

    def test_constant(self):
        f = gf(2, [2.5] * 4)
        for q in enumerate_cubes(f.grid):
            assert average(f, q) == 2.5

    def test_right_half(self):
        f = gf(2, [1, 3, 5, 7])
        assert average(f, Cube(f.grid, 2, 2)) == 6.0

    def test_indicator_average_is_intersection_ratio(self):
        # average of chi_{Q'} over Q equals |Q cap Q'| / |Q| exactly
        g = DyadicGrid(1, 3)
        cubes = list(enumerate_cubes(g))
        for q in cubes:
            qi = set(q.flat_indices().tolist())
            for qp in cubes:
                chi = indicator(qp)
                expected = len(qi & set(qp.flat_indices().tolist())) / q.cell_count
                assert average(chi, q) == expected


class TestOscillation:
    def test_full(self):
        f = gf(2, [1, 3, 5, 7])
        osc = oscillation(f, Cube(f.grid, 0, 4))
        assert list(osc.flat) == [-3.0, -1.0, 1.0, 3.0]

    def test_constant_gives_zero(self):
        f = gf(2, [4.0] * 4)
        osc = oscillation(f, Cube(f.grid, 0, 4))
        assert not np.any(osc.values)

    def test_left_half(self):
        f = gf(2, [1, 3, 5, 7])
        osc = oscillation(f, Cube(f.grid, 0, 2))
        assert list(osc.flat) == [-1.0, 1.0, 0.0, 0.0]

    def test_zero_average_over_cube(self):
        rng = np.random.default_rng(7)
        f = gf(3, rng.normal(size=8) * 10)
        for q in enumerate_cubes(f.grid):
            osc = oscillation(f, q)
            assert abs(average(osc, q)) <= 1e-12 * f.max_abs()


class TestEnumerateCubes:
    def test_count_1d_level1(self):
        assert len(list(enumerate_cubes(DyadicGrid(1, 1)))) == 3

    def test_count_1d_level2(self):
        assert len(list(enumerate_cubes(DyadicGrid(1, 2)))) == 10

    def test_count_2d_level1(self):
        assert len(list(enumerate_cubes(DyadicGrid(2, 1)))) == 5

    def test_count_matches_formula(self):
        for n, L in [(1, 3), (1, 4), (2, 2), (2, 3)]:
            g = DyadicGrid(n, L)
            assert len(list(enumerate_cubes(g))) == cube_count(g)

    def test_distinct_and_contains_all_cells(self):
        g = DyadicGrid(2, 2)
        cubes = list(enumerate_cubes(g))
        keys = {(q.corner, q.side_cells) for q in cubes}
        assert len(keys) == len(cubes)
        singles = {q.corner for q in cubes if q.side_cells == 1}
        assert len(singles) == g.cell_count


class TestDyadicDescendants:
    def test_full_interval_level2(self):
        g = DyadicGrid(1, 2)
        assert len(dyadic_descendants(Cube(g, 0, 4))) == 7

    def test_single_cell(self):
        g = DyadicGrid(1, 2)
        q = Cube(g, 1, 1)
        assert dyadic_descendants(q) == [q]

    def test_2d_unit_square(self):
        g = DyadicGrid(2, 1)
        assert len(dyadic_descendants(Cube(g, (0, 0), 2))) == 5

    def test_non_power_of_two_rejected(self):
        g = DyadicGrid(1, 2)
        with pytest.raises(UnsupportedCubeError):
            dyadic_descendants(Cube(g, 0, 3))

    def test_matches_bruteforce_definition(self):
        # Q' is a descendant of Q0 iff Q' lies in Q0, has power-of-two side,
        # side dividing Q0's, and corner aligned to Q0's dyadic lattice.
        g = DyadicGrid(1, 3)
        q0 = Cube(g, 2, 4)
        got = {(q.corner, q.side_cells) for q in dyadic_descendants(q0)}
        expect = set()
        for q in enumerate_cubes(g):
            if not q0.contains(q) or not q.has_power_of_two_side():
                continue
            if q.side_cells > q0.side_cells:
                continue
            if all((qc - c0) % q.side_cells == 0 for qc, c0 in zip(q.corner, q0.corner)):
                expect.add((q.corner, q.side_cells))
        assert got == expect


class TestDilate:
    def test_identity(self):
        f = gf(2, [1, 2, 0, 0])
        assert dilate(f, 0) is f

    def test_stretch_level1(self):
        f = gf(1, [5, 0])
        assert list(dilate(f, 1).flat) == [5.0, 5.0]

    def test_cell_doubling(self):
        f = gf(2, [1, 2, 0, 0])
        assert list(dilate(f, 1).flat) == [1.0, 1.0, 2.0, 2.0]

    def test_support_violation(self):
        f = gf(2, [1, 2, 3, 0])
        with pytest.raises(UnsupportedDilationError):
            dilate(f, 1)

    def test_2d(self):
        g = DyadicGrid(2, 1)
        f = GridFunction(g, [[7, 0], [0, 0]])
        assert np.all(dilate(f, 1).values == 7.0)


class TestRescaleToUnit:
    def test_base_cube_identity(self):
        f = gf(2, [1, 3, 5, 7])
        out = rescale_to_unit(f, Cube(f.grid, 0, 4))
        assert out.grid == f.grid
        assert np.array_equal(out.values, f.values)

    def test_right_half(self):
        f = gf(2, [1, 3, 5, 7])
        out = rescale_to_unit(f, Cube(f.grid, 2, 2))
        assert out.grid.level == 1
        assert list(out.flat) == [5.0, 7.0]

    def test_indicator_quarter(self):
        f = gf(2, [1, 0, 0, 0])
        out = rescale_to_unit(f, Cube(f.grid, 0, 2))
        assert list(out.flat) == [1.0, 0.0]

    def test_single_cell(self):
        f = gf(2, [1, 3, 5, 7])
        out = rescale_to_unit(f, Cube(f.grid, 3, 1))
        assert out.grid.level == 0
        assert list(out.flat) == [7.0]

    def test_non_power_of_two_rejected(self):
        f = gf(2, [1, 3, 5, 7])
        with pytest.raises(UnsupportedCubeError):
            rescale_to_unit(f, Cube(f.grid, 0, 3))


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 4), st.integers(0, 200), st.integers(0, 200), st.data())
def test_indicator_average_property(level, a, b, data):
    g = DyadicGrid(1, level)
    n = g.cells_per_side
    s1 = data.draw(st.integers(1, n))
    c1 = data.draw(st.integers(0, n - s1))
    s2 = data.draw(st.integers(1, n))
    c2 = data.draw(st.integers(0, n - s2))
    q, qp = Cube(g, c1, s1), Cube(g, c2, s2)
    overlap = max(0, min(c1 + s1, c2 + s2) - max(c1, c2))
    assert average(indicator(qp), q) == overlap / s1


class TestSerialization:
    def test_round_trip(self):
        rng = np.random.default_rng(3)
        f = gf(3, rng.normal(size=8) * 1e3)
        buf = io.StringIO()
        write_grid_function(f, buf)
        back = read_grid_function(io.StringIO(buf.getvalue()))
        assert back.grid == f.grid
        assert np.array_equal(back.values, f.values)

    def test_round_trip_2d(self, tmp_path):
        rng = np.random.default_rng(4)
        f = GridFunction(DyadicGrid(2, 2), rng.normal(size=16))
        path = tmp_path / "f.txt"
        write_grid_function(f, path)
        back = read_grid_function(path)
        assert np.array_equal(back.values, f.values)

    def test_header_format(self):
        f = gf(1, [0.5, -1.5])
        buf = io.StringIO()
        write_grid_function(f, buf)
        assert buf.getvalue().splitlines()[0] == "1 1"

    @pytest.mark.parametrize(
        "text",
        ["", "1\n", "1 1\n0.0\n", "1 1\n0.0\nxyz\n", "9 1\n0.0\n1.0\n"],
    )
    def test_malformed_rejected(self, text):
        with pytest.raises(SpecFormatError):
            read_grid_function(io.StringIO(text))
