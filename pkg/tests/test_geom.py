"""Signed distance, space-time lifting, observation synthesis, point-to-mesh."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pcsim.errors import TopologyError, VisibilityError
from pcsim.geom import (
    Boundary2D,
    Mesh,
    PointCloudFrame,
    PointCloudSequence,
    Surface3D,
    make_boundary,
    observe,
    point_to_mesh_distance,
    sdf_target,
    signed_distance,
    spacetime_lift,
)


def circle_polygon(n=512, r=1.0, center=(0.0, 0.0)):
    """Fan-triangulated disc whose boundary is an n-gon."""
    ang = 2 * np.pi * np.arange(n) / n
    ring = np.stack([center[0] + r * np.cos(ang), center[1] + r * np.sin(ang)], axis=1)
    positions = np.concatenate([[center], ring])
    cells = np.array([[0, 1 + i, 1 + (i + 1) % n] for i in range(n)])
    return positions, cells


class TestSignedDistance:
    def test_unit_square_center(self, unit_square):
        b = make_boundary(*unit_square)
        assert signed_distance(b, [0.5, 0.5]) == pytest.approx(-0.5)

    def test_on_boundary(self, unit_square):
        b = make_boundary(*unit_square)
        assert signed_distance(b, [0.0, 0.5]) == pytest.approx(0.0, abs=1e-15)

    def test_outside(self, unit_square):
        b = make_boundary(*unit_square)
        assert signed_distance(b, [2.0, 0.5]) == pytest.approx(1.0)

    def test_against_analytic_circle(self, rng):
        n = 512
        positions, cells = circle_polygon(n=n, r=1.0, center=(0.3, -0.2))
        b = make_boundary(positions, cells)
        # max chord-vs-arc deviation of the polygonization
        bound = 2.0 * (1.0 - np.cos(np.pi / n))
        q = rng.uniform(-2, 2, size=(400, 2))
        exact = np.linalg.norm(q - np.array([0.3, -0.2]), axis=1) - 1.0
        got = b.signed_distance(q)
        assert np.max(np.abs(got - exact)) <= 2.0 * max(bound, 1e-12) + 1e-9

    def test_open_boundary_rejected(self):
        positions = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
        with pytest.raises(TopologyError):
            Boundary2D(positions, np.zeros((0, 3), dtype=np.int64), edges=np.array([[0, 1, 2]]))

    def test_cube_surface_3d(self, rng):
        v = np.array(
            [[0, 0, 0], [1, 0, 0], [1, 1, 0], [0, 1, 0], [0, 0, 1], [1, 0, 1], [1, 1, 1], [0, 1, 1]],
            dtype=np.float64,
        )
        tris = np.array(
            [
                [0, 2, 1], [0, 3, 2],  # z = 0, outward -z
                [4, 5, 6], [4, 6, 7],  # z = 1
                [0, 1, 5], [0, 5, 4],  # y = 0
                [2, 3, 7], [2, 7, 6],  # y = 1
                [0, 4, 7], [0, 7, 3],  # x = 0
                [1, 2, 6], [1, 6, 5],  # x = 1
            ]
        )
        s = Surface3D(v, tris)
        assert signed_distance(s, [0.5, 0.5, 0.5]) == pytest.approx(-0.5)
        assert signed_distance(s, [0.5, 0.5, 2.0]) == pytest.approx(1.0)
        assert signed_distance(s, [-1.0, 0.5, 0.5]) == pytest.approx(1.0)

    def test_sdf_target_values(self):
        assert sdf_target(0.0, 5.0) == 0.0
        assert sdf_target(0.1, 5.0) == pytest.approx(math.tanh(0.5))
        assert sdf_target(10.0, 200.0) == pytest.approx(1.0)
        assert np.sign(sdf_target(-0.3, 2.0)) == -1.0
        with pytest.raises(ValueError):
            sdf_target(0.0, 0.0)


def make_seq(frames_xyz, dt=0.1):
    frames = [PointCloudFrame(p, np.zeros(len(p), dtype=np.uint8)) for p in frames_xyz]
    return PointCloudSequence(frames, dt)


class TestSpacetimeLift:
    def test_tau_zero_collapses_time(self, rng):
        seq = make_seq([rng.random((5, 3)) for _ in range(4)])
        lifted = spacetime_lift(seq, 0.0)
        assert np.all(lifted.coords[:, 3] == 0.0)

    def test_two_frames_tau_sixteen(self, rng):
        seq = make_seq([rng.random((3, 3)) for _ in range(2)])
        lifted = spacetime_lift(seq, 16.0)
        assert sorted(set(lifted.coords[:, 3])) == [0.0, 16.0]

    def test_single_frame(self, rng):
        seq = make_seq([rng.random((3, 3))])
        assert np.all(spacetime_lift(seq, 7.0).coords[:, 3] == 0.0)

    def test_spatial_coords_unchanged(self, rng):
        frames = [rng.random((4, 3)) for _ in range(3)]
        lifted = spacetime_lift(make_seq(frames), 5.0)
        np.testing.assert_array_equal(lifted.coords[:, :3].reshape(3, 4, 3), np.stack(frames))

    @settings(max_examples=30, deadline=None)
    @given(st.floats(0.0, 10.0), st.floats(0.0, 10.0))
    def test_monotone_in_tau(self, tau1, tau2):
        tau1, tau2 = sorted([tau1, tau2])
        r = np.random.default_rng(7)
        frames = [r.random((4, 3)) for _ in range(3)]
        seq = make_seq(frames)
        a = spacetime_lift(seq, tau1)
        b = spacetime_lift(seq, tau2)
        d1 = np.linalg.norm(a.coords[:, None] - a.coords[None, :], axis=2)
        d2 = np.linalg.norm(b.coords[:, None] - b.coords[None, :], axis=2)
        same_frame = a.frame_idx[:, None] == a.frame_idx[None, :]
        assert np.all(d2[~same_frame] >= d1[~same_frame] - 1e-12)
        assert np.allclose(d2[same_frame], d1[same_frame])


class TestObserve:
    def test_square_from_above_sees_top(self, unit_square):
        positions, cells = unit_square
        frame = observe(positions, cells, (0.0, -1.0, 0.0), 16, np.random.default_rng(0))
        assert frame.n_points == 16
        np.testing.assert_allclose(frame.positions[:, 1], 1.0)
        assert np.all(frame.positions[:, 2] == 0.0)

    def test_exact_count(self, unit_square):
        positions, cells = unit_square
        frame = observe(positions, cells, (0.0, -1.0, 0.0), 37, np.random.default_rng(1))
        assert frame.n_points == 37

    def test_deterministic_per_seed(self, unit_square):
        positions, cells = unit_square
        a = observe(positions, cells, (0.0, -1.0, 0.0), 8, np.random.default_rng(5))
        b = observe(positions, cells, (0.0, -1.0, 0.0), 8, np.random.default_rng(5))
        np.testing.assert_array_equal(a.positions, b.positions)

    def test_cell_order_invariance(self, rng):
        from pcsim.data.beam_mesh import triangulate_beam
        from pcsim.data.params import BeamGeometry

        mesh = triangulate_beam(BeamGeometry(height=0.3, length=2.0, mesh_h=0.15))
        shuffled = Mesh(mesh.rest_positions, mesh.cells[rng.permutation(len(mesh.cells))], mesh.node_type)
        a = observe(mesh.rest_positions, mesh.cells, (0.0, -1.0), 20, np.random.default_rng(3))
        b = observe(shuffled.rest_positions, shuffled.cells, (0.0, -1.0), 20, np.random.default_rng(3))
        np.testing.assert_array_equal(a.positions, b.positions)

    def test_no_visible_boundary(self, unit_square):
        positions, cells = unit_square
        with pytest.raises(VisibilityError):
            # a zero view vector faces nothing
            observe(positions, cells, (0.0, 0.0), 4, np.random.default_rng(0))


class TestPointToMesh:
    def test_points_on_vertices(self, unit_square):
        positions, cells = unit_square
        pts = np.zeros((4, 3))
        pts[:, :2] = positions
        frame = PointCloudFrame(pts, np.zeros(4, dtype=np.uint8))
        assert point_to_mesh_distance(frame, positions, cells) == pytest.approx(0.0, abs=1e-15)

    def test_perpendicular_offset(self, unit_square):
        positions, cells = unit_square
        frame = PointCloudFrame(np.array([[0.5, 1.25, 0.0]]), np.zeros(1, dtype=np.uint8))
        assert point_to_mesh_distance(frame, positions, cells) == pytest.approx(0.25)

    def test_duplication_invariance(self, unit_square, rng):
        positions, cells = unit_square
        pts = np.zeros((6, 3))
        pts[:, :2] = rng.uniform(-1, 2, size=(6, 2))
        f1 = PointCloudFrame(pts, np.zeros(6, dtype=np.uint8))
        f2 = PointCloudFrame(np.concatenate([pts, pts]), np.zeros(12, dtype=np.uint8))
        assert point_to_mesh_distance(f1, positions, cells) == pytest.approx(
            point_to_mesh_distance(f2, positions, cells)
        )
