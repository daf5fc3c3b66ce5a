from __future__ import annotations

import numpy as np
import pytest
from numpy.testing import assert_allclose

from weakconv import CapacityError, DomainError
from weakconv.carrier import (ball_set, box_set, finite_space, grid_partition,
                              metric_axioms_report, point_set, space_from_json,
                              trivial_partition, unit_cube)


def three_point_space():
    d = np.array([[0.0, 1.0, 2.0], [1.0, 0.0, 1.5], [2.0, 1.5, 0.0]])
    return finite_space(("a", "b", "c"), d)


class TestSpaces:
    def test_cube_basics(self):
        s = unit_cube(2)
        assert s.kind == "cube" and s.dim == 2
        assert s.contains((0.5, 0.5))
        assert s.contains((0.0, 1.0))
        assert not s.contains((1.2, 0.5))
        assert_allclose(s.distance((0.0, 0.0), (1.0, 1.0)), np.sqrt(2.0))
        assert_allclose(s.diameter(), np.sqrt(2.0))

    def test_cube_dim_limits(self):
        with pytest.raises(CapacityError):
            unit_cube(0)
        with pytest.raises(CapacityError):
            unit_cube(9)
        assert unit_cube(8).dim == 8

    def test_finite_basics(self):
        s = three_point_space()
        assert s.n_points == 3
        assert s.contains(0) and s.contains(2) and not s.contains(3)
        assert s.distance(0, 2) == 2.0
        assert s.diameter() == 2.0

    def test_finite_point_cap(self):
        n = 65
        with pytest.raises(CapacityError):
            finite_space(range(n), np.zeros((n, n)))

    def test_broken_matrix_rejected(self):
        bad = np.array([[0.0, 5.0], [5.0, 0.1]])  # nonzero self-distance
        with pytest.raises(DomainError):
            finite_space(("a", "b"), bad)

    def test_triangle_violation_rejected(self):
        bad = np.array([[0.0, 1.0, 5.0], [1.0, 0.0, 1.0], [5.0, 1.0, 0.0]])
        with pytest.raises(DomainError):
            finite_space(("a", "b", "c"), bad)

    def test_space_equality(self):
        assert unit_cube(2) == unit_cube(2)
        assert unit_cube(2) != unit_cube(3)
        assert three_point_space() == three_point_space()
        assert three_point_space() != unit_cube(1)


class TestMetricAxioms:
    def test_finite_exhaustive_pass(self):
        rep = metric_axioms_report(three_point_space())
        assert rep.ok
        assert rep.checked_triples == 27

    def test_finite_reports_violation(self):
        bad = np.array([[0.0, 1.0, 5.0], [1.0, 0.0, 1.0], [5.0, 1.0, 0.0]])
        space = finite_space(("a", "b", "c"), bad, validate=False)
        rep = metric_axioms_report(space)
        assert not rep.ok
        assert any("triangle" in v for v in rep.violations)

    def test_asymmetry_reported(self):
        bad = np.array([[0.0, 1.0], [2.0, 0.0]])
        space = finite_space(("a", "b"), bad, validate=False)
        rep = metric_axioms_report(space)
        assert not rep.ok
        assert any("symmetry" in v for v in rep.violations)

    def test_cube_sampled_pass(self):
        rep = metric_axioms_report(unit_cube(3), samples=200, seed=1)
        assert rep.ok
        assert rep.checked_triples == 200


class TestMeasurableSets:
    def test_box_half_open(self):
        s = unit_cube(1)
        a = box_set([0.0], [0.5])
        pts = s.points_array([(0.0,), (0.25,), (0.5,)])
        assert list(a.contains(s, pts)) == [True, True, False]

    def test_box_closed_top_edge(self):
        s = unit_cube(1)
        a = box_set([0.5], [1.0], closed_hi=(True,))
        pts = s.points_array([(0.5,), (1.0,)])
        assert list(a.contains(s, pts)) == [True, True]

    def test_point_set_and_complement(self):
        s = three_point_space()
        a = point_set([0, 2])
        pts = s.points_array([0, 1, 2])
        assert list(a.contains(s, pts)) == [True, False, True]
        assert list(a.complement_contains(s, pts)) == [False, True, False]

    def test_ball_set(self):
        s = unit_cube(2)
        a = ball_set((0.5, 0.5), 0.25)
        pts = s.points_array([(0.5, 0.5), (0.75, 0.5), (0.9, 0.9)])
        got = list(a.contains(s, pts))
        assert got == [True, True, False]  # boundary included (closed ball)


class TestPartitions:
    def test_grid_cell_count(self):
        s = unit_cube(2)
        part = grid_partition(s, 0.25)
        assert part.n_cells == 16

    def test_grid_indexing_covers(self):
        s = unit_cube(2)
        part = grid_partition(s, 0.5)
        rng = np.random.default_rng(0)
        pts = rng.random((500, 2))
        idx = part.cell_index(pts)
        assert idx.min() >= 0 and idx.max() < part.n_cells

    def test_top_edge_lands_in_last_cell(self):
        s = unit_cube(1)
        part = grid_partition(s, 0.25)
        idx = part.cell_index(s.points_array([(1.0,)]))
        assert idx[0] == part.n_cells - 1

    def test_representatives_inside_cells(self):
        s = unit_cube(2)
        part = grid_partition(s, 0.5)
        reps = part.representatives()
        assert list(part.cell_index(reps)) == list(range(part.n_cells))

    def test_reps_of_cells_matches_representatives(self):
        s = unit_cube(2)
        part = grid_partition(s, 0.25)
        reps = part.representatives()
        some = np.array([0, 3, 7, 15])
        assert_allclose(part.reps_of_cells(some), reps[some])

    def test_trivial_partition_on_finite(self):
        s = three_point_space()
        part = trivial_partition(s)
        assert part.n_cells == 3
        idx = part.cell_index(s.points_array([2, 0, 1]))
        assert list(idx) == [2, 0, 1]

    def test_cells_partition_the_cube(self):
        # every cell set is disjoint from the others and the union is all
        s = unit_cube(1)
        part = grid_partition(s, 0.25)
        pts = s.points_array([(x,) for x in np.linspace(0.0, 1.0, 101)])
        member = np.stack([c.contains(s, pts) for c in part.cell_sets()])
        assert_allclose(member.sum(axis=0), 1.0)


class TestJson:
    def test_cube_round_trip(self):
        s = space_from_json({"kind": "cube", "dim": 3})
        assert s == unit_cube(3)

    def test_finite_round_trip(self):
        node = {"kind": "finite", "labels": ["a", "b"],
                "dist": [[0.0, 1.0], [1.0, 0.0]]}
        s = space_from_json(node)
        assert s.labels == ("a", "b")
        assert s.distance(0, 1) == 1.0

    @pytest.mark.parametrize("node", [
        {}, {"kind": "torus"}, {"kind": "cube"},
        {"kind": "finite", "labels": ["a"]},
    ])
    def test_bad_nodes_rejected(self, node):
        with pytest.raises(DomainError):
            space_from_json(node)
