import math

import numpy as np
import pytest

from sdot import domain, laguerre
from sdot.errors import ValidationError
from sdot.geom import area, polygon_contains

from conftest import random_problem


def halfplane_contains(h, p):
    a, b, c = h
    return a * p[0] + b * p[1] <= c


class TestBisector:
    def test_voronoi_midline(self):
        h = laguerre.bisector((0.25, 0.5), 0.0, (0.75, 0.5), 0.0)
        # the set x <= 0.5
        assert halfplane_contains(h, (0.49, 0.1))
        assert not halfplane_contains(h, (0.51, 0.9))
        a, b, c = h
        assert b == 0.0 and c / a == pytest.approx(0.5)

    def test_weight_shift(self):
        h = laguerre.bisector((0.25, 0.5), 0.25, (0.75, 0.5), 0.0)
        a, b, c = h
        assert c / a == pytest.approx(0.75)

    def test_swap_gives_complement(self):
        h1 = laguerre.bisector((0.25, 0.5), 0.1, (0.75, 0.5), 0.3)
        h2 = laguerre.bisector((0.75, 0.5), 0.3, (0.25, 0.5), 0.1)
        rng = np.random.default_rng(0)
        for p in rng.random((50, 2)):
            on1 = h1[0] * p[0] + h1[1] * p[1] - h1[2]
            on2 = h2[0] * p[0] + h2[1] * p[1] - h2[2]
            assert on1 == pytest.approx(-on2, abs=1e-15)

    def test_membership_matches_power_inequality(self):
        rng = np.random.default_rng(1)
        yi, yj = rng.random((2, 2))
        pi, pj = rng.uniform(-0.2, 0.2, 2)
        h = laguerre.bisector(tuple(yi), pi, tuple(yj), pj)
        for p in rng.random((100, 2)):
            power_i = (p - yi) @ (p - yi) - pi
            power_j = (p - yj) @ (p - yj) - pj
            assert halfplane_contains(h, p) == (power_i <= power_j + 1e-15)

    def test_coincident_sites_rejected(self):
        with pytest.raises(ValidationError, match="coincident"):
            laguerre.bisector((0.5, 0.5), 0.0, (0.5, 0.5), 1.0)


class TestBuild:
    def test_single_site_owns_everything(self, unit_square):
        sites = domain.make_sites([[0.3, 0.6]], [1.0], 1.0)
        diag = laguerre.build(unit_square, sites, [5.0])
        assert diag.masses == pytest.approx([unit_square.total_mass], abs=1e-14)
        assert sum(area(f.polygon) for f in diag.fragments) == pytest.approx(1.0, abs=1e-13)
        assert diag.interfaces == {}

    def test_symmetric_pair(self, unit_square):
        sites = domain.make_sites([[0.25, 0.5], [0.75, 0.5]], [0.5, 0.5], 1.0)
        diag = laguerre.build(unit_square, sites, np.zeros(2))
        assert diag.masses == pytest.approx([0.5, 0.5], abs=1e-14)
        segments = diag.interfaces[(0, 1)]
        length = sum(math.hypot(q[0] - p[0], q[1] - p[1]) for p, q, _ in segments)
        assert length == pytest.approx(1.0, abs=1e-12)
        for p, q, _ in segments:
            assert p[0] == pytest.approx(0.5, abs=1e-12)
            assert q[0] == pytest.approx(0.5, abs=1e-12)

    def test_weighted_pair_moves_interface(self, analytic_two_site):
        mesh, sites = analytic_two_site
        diag = laguerre.build(mesh, sites, [0.25, 0.0])
        assert diag.masses == pytest.approx([0.75, 0.25], abs=1e-14)
        for p, q, _ in diag.interfaces[(0, 1)]:
            assert p[0] == pytest.approx(0.75, abs=1e-12)

    def test_interface_on_mesh_edge_is_recovered(self):
        # grid line x = 0.5 coincides with the Voronoi bisector here
        mesh = domain.square_mesh(2, "const:1")
        sites = domain.make_sites([[0.25, 0.5], [0.75, 0.5]], [0.5, 0.5], 1.0)
        diag = laguerre.build(mesh, sites, np.zeros(2))
        assert diag.masses == pytest.approx([0.5, 0.5], abs=1e-12)
        assert laguerre.interface_weight(diag, 0, 1) == pytest.approx(1.0, rel=1e-10)

    def test_psi_length_checked(self, unit_square):
        sites = domain.make_sites([[0.3, 0.6]], [1.0], 1.0)
        with pytest.raises(ValidationError):
            laguerre.build(unit_square, sites, [0.0, 1.0])


class TestInterfaceWeight:
    def test_two_site_value(self, unit_square):
        sites = domain.make_sites([[0.25, 0.5], [0.75, 0.5]], [0.5, 0.5], 1.0)
        diag = laguerre.build(unit_square, sites, np.zeros(2))
        # segment integral 1 over 2 * 0.5 distance
        assert laguerre.interface_weight(diag, 0, 1) == pytest.approx(1.0, rel=1e-12)
        assert laguerre.interface_weight(diag, 1, 0) == pytest.approx(1.0, rel=1e-12)

    def test_non_adjacent_pair_is_zero(self, unit_square):
        sites = domain.make_sites(
            [[0.2, 0.5], [0.5, 0.5], [0.8, 0.5]], [1 / 3] * 3, 1.0
        )
        diag = laguerre.build(unit_square, sites, np.zeros(3))
        assert laguerre.interface_weight(diag, 0, 2) == 0.0

    def test_linear_in_density(self):
        mesh = domain.square_mesh(1, "const:2")
        sites = domain.make_sites([[0.25, 0.5], [0.75, 0.5]], [1.0, 1.0], mesh.total_mass)
        diag = laguerre.build(mesh, sites, np.zeros(2))
        assert laguerre.interface_weight(diag, 0, 1) == pytest.approx(2.0, rel=1e-12)

    def test_same_site_rejected(self, unit_square):
        sites = domain.make_sites([[0.3, 0.6]], [1.0], 1.0)
        diag = laguerre.build(unit_square, sites, [0.0])
        with pytest.raises(ValidationError):
            laguerre.interface_weight(diag, 0, 0)


class TestDiagramProperties:
    def test_voronoi_reduction(self, unit_square):
        mesh, sites = random_problem(10, seed=31)
        diag = laguerre.build(mesh, sites, np.zeros(10))
        pts = domain.sample(mesh, 10**5, seed=77)
        nearest = laguerre.assign(pts, sites, np.zeros(10))

        # exclude points within 1e-9 of any bisector (power-distance ties)
        d2 = ((pts[:, None, :] - sites.positions[None, :, :]) ** 2).sum(axis=2)
        part = np.partition(d2, 1, axis=1)
        diff = np.abs(part[:, 1] - part[:, 0])
        gaps = np.linalg.norm(
            sites.positions[:, None, :] - sites.positions[None, :, :], axis=2
        )
        min_gap = gaps[gaps > 0].min()
        clear = diff > 1e-9 * 2 * min_gap

        frags_by_site = {}
        for f in diag.fragments:
            frags_by_site.setdefault(f.site, []).append(f.polygon)
        agree = 0
        total = 0
        tol = 1e-9 * mesh.bbox_diameter
        for p, j in zip(pts[clear], nearest[clear]):
            total += 1
            if any(polygon_contains(poly, tuple(p), tol) for poly in frags_by_site[j]):
                agree += 1
        assert agree / total >= 0.9999

    def test_gauge_invariance(self):
        mesh, sites = random_problem(8, seed=13)
        rng = np.random.default_rng(99)
        psi = rng.uniform(-0.05, 0.05, 8)
        d1 = laguerre.build(mesh, sites, psi)
        d2 = laguerre.build(mesh, sites, psi + 10.0)
        assert len(d1.fragments) == len(d2.fragments)
        for f1, f2 in zip(d1.fragments, d2.fragments):
            assert (f1.site, f1.triangle) == (f2.site, f2.triangle)
            assert len(f1.polygon) == len(f2.polygon)
            for p, q in zip(f1.polygon, f2.polygon):
                assert math.hypot(p[0] - q[0], p[1] - q[1]) <= 1e-12

    def test_partition_of_triangles_and_mass(self):
        mesh, sites = random_problem(25, seed=41, resolution=2, density="linear-x")
        rng = np.random.default_rng(3)
        psi = rng.uniform(-0.02, 0.02, 25)
        diag = laguerre.build(mesh, sites, psi)

        per_tri = np.zeros(len(mesh.triangles))
        for f in diag.fragments:
            per_tri[f.triangle] += area(f.polygon)
        assert per_tri == pytest.approx(mesh.tri_areas, rel=1e-10)
        assert diag.masses.sum() == pytest.approx(mesh.total_mass, rel=1e-10)
        assert (diag.masses >= 0).all()

    def test_mass_monotone_in_own_weight(self):
        mesh, sites = random_problem(12, seed=8)
        psi = np.zeros(12)
        base = laguerre.build(mesh, sites, psi)
        for j in (0, 5, 11):
            bumped = psi.copy()
            bumped[j] += 0.01
            diag = laguerre.build(mesh, sites, bumped)
            assert diag.masses[j] >= base.masses[j] - 1e-12

    def test_interface_segments_lie_on_bisectors(self):
        mesh, sites = random_problem(14, seed=52)
        rng = np.random.default_rng(53)
        psi = rng.uniform(-0.03, 0.03, 14)
        diag = laguerre.build(mesh, sites, psi)
        assert diag.interfaces  # adjacency exists on this instance
        for (i, j), segments in diag.interfaces.items():
            h = laguerre.bisector(
                tuple(sites.positions[i]), psi[i], tuple(sites.positions[j]), psi[j]
            )
            a, b, c = h
            scale = math.hypot(a, b)
            for p, q, _ in segments:
                assert abs(a * p[0] + b * p[1] - c) <= 1e-11 * scale
                assert abs(a * q[0] + b * q[1] - c) <= 1e-11 * scale

    def test_partition_on_non_square_domain(self):
        mesh = domain.make_mesh(
            [[0, 0], [2, 0], [0.5, 1.5]], [1.0, 0.5, 2.0], [[0, 1, 2]]
        )
        sites = domain.make_sites(
            [[0.5, 0.4], [1.2, 0.3]], [0.5, 0.5], mesh.total_mass, normalize=True
        )
        diag = laguerre.build(mesh, sites, np.array([0.01, 0.0]))
        assert diag.masses.sum() == pytest.approx(mesh.total_mass, rel=1e-12)
        per_area = sum(area(f.polygon) for f in diag.fragments)
        assert per_area == pytest.approx(float(mesh.tri_areas[0]), rel=1e-12)


class TestAssign:
    def test_matches_bruteforce(self):
        mesh, sites = random_problem(7, seed=2)
        rng = np.random.default_rng(0)
        psi = rng.uniform(-0.1, 0.1, 7)
        pts = rng.random((500, 2))
        got = laguerre.assign(pts, sites, psi, chunk=64)
        d2 = ((pts[:, None, :] - sites.positions[None, :, :]) ** 2).sum(axis=2) - psi
        assert np.array_equal(got, np.argmin(d2, axis=1))
