"""Heat-method geodesics, Dijkstra oracle, and Gaussian machinery tests."""

import numpy as np
import pytest
from scipy.stats import spearmanr

from meshreason.geodesic import (
    dijkstra_geodesic,
    fit_gaussian,
    gaussian_density,
    heat_geodesic,
)
from meshreason.mesh import Mesh
from meshreason.primitives import grid_patch, icosphere


def floyd_warshall_oracle(mesh):
    """All-pairs shortest paths on the dual graph, plain triple loop."""
    n = mesh.face_count
    cent = mesh.face_centroids()
    dist = np.full((n, n), np.inf)
    np.fill_diagonal(dist, 0.0)
    for a in range(n):
        for b in range(a + 1, n):
            if len(set(mesh.faces[a]) & set(mesh.faces[b])) >= 2:
                w = np.linalg.norm(cent[a] - cent[b])
                dist[a, b] = dist[b, a] = w
    for k in range(n):
        for i in range(n):
            for j in range(n):
                via = dist[i, k] + dist[k, j]
                if via < dist[i, j]:
                    dist[i, j] = via
    return dist


class TestHeatGeodesic:
    def test_source_distance_zero(self):
        mesh = icosphere(2)
        field = heat_geodesic(mesh, 17)
        assert abs(field.distance[17]) <= 1e-6 * mesh.diameter()

    def test_icosphere_antipodal_within_10_percent(self):
        mesh = icosphere(3)
        src = 0
        field = heat_geodesic(mesh, src)
        cent = mesh.face_centroids()
        cent /= np.linalg.norm(cent, axis=1, keepdims=True)
        angles = np.arccos(np.clip(cent @ cent[src], -1, 1))
        antipode = int(np.argmax(angles))
        expected = angles[antipode]  # great-circle distance, radius 1
        assert abs(field.distance[antipode] - expected) / expected < 0.10

    def test_grid_corner_source_tracks_euclidean(self):
        # flat-surface analytic oracle; near-field faces dominate the tail so
        # the agreement is asserted on the median
        mesh = grid_patch(5, 5)
        src = 0
        field = heat_geodesic(mesh, src)
        cent = mesh.face_centroids()
        euclid = np.linalg.norm(cent - cent[src], axis=1)
        others = np.arange(mesh.face_count) != src
        rel = np.abs(field.distance[others] - euclid[others]) / euclid[others]
        assert np.median(rel) < 0.10

    def test_all_distances_nonnegative_and_few_clamped(self):
        for mesh in (icosphere(2), grid_patch(6, 6)):
            field = heat_geodesic(mesh, mesh.face_count // 2)
            assert (field.distance >= 0).all()
            assert np.isfinite(field.distance).all()
            assert field.clamped_faces <= max(1, int(0.01 * mesh.face_count))

    def test_unreachable_component_is_inf(self):
        a = grid_patch(2, 2)
        b = Mesh(a.vertices + np.array([10.0, 0, 0]), a.faces)
        merged = Mesh(
            np.vstack([a.vertices, b.vertices]),
            np.vstack([a.faces, b.faces + a.vertex_count]),
        )
        field = heat_geodesic(merged, 0)
        assert np.isfinite(field.distance[: a.face_count]).all()
        assert np.isinf(field.distance[a.face_count :]).all()

    def test_source_out_of_range(self):
        with pytest.raises(IndexError):
            heat_geodesic(grid_patch(2, 2), 99)

    def test_heat_vs_dijkstra_shape_agreement(self):
        # dual-graph Dijkstra overestimates true geodesics by a systematic
        # lattice factor; remove the global scale, then compare medians
        for mesh, src in ((icosphere(2), 7), (icosphere(3), 0), (grid_patch(8, 8), 0)):
            heat = heat_geodesic(mesh, src).distance
            dij = dijkstra_geodesic(mesh, src).distance
            mask = (np.arange(mesh.face_count) != src) & (dij > 0)
            scale = np.median(dij[mask] / heat[mask])
            aligned = np.abs(scale * heat[mask] - dij[mask]) / dij[mask]
            assert np.median(aligned) <= 0.10
            assert spearmanr(heat[mask], dij[mask]).statistic >= 0.97


class TestDijkstra:
    def test_source_zero(self):
        assert dijkstra_geodesic(grid_patch(3, 3), 4).distance[4] == 0.0

    def test_two_adjacent_triangles(self):
        mesh = Mesh(
            np.array([[0, 0, 0], [1, 0, 0], [0, 1, 0], [1, 1, 0.0]]),
            np.array([[0, 1, 2], [1, 3, 2]]),
        )
        cent = mesh.face_centroids()
        expected = np.linalg.norm(cent[0] - cent[1])
        field = dijkstra_geodesic(mesh, 0)
        assert field.distance[1] == pytest.approx(expected)

    def test_distance_csv_dump(self, tmp_path):
        from meshreason.geodesic import save_distance_csv

        field = dijkstra_geodesic(grid_patch(2, 2), 0)
        path = tmp_path / "field.csv"
        save_distance_csv(path, field)
        lines = path.read_text().strip().splitlines()
        assert lines[0] == "faceIndex,distance"
        assert len(lines) == 9
        assert lines[1] == "0,0"

    def test_grid_matches_floyd_warshall(self):
        mesh = grid_patch(5, 5)
        assert mesh.face_count <= 50
        oracle = floyd_warshall_oracle(mesh)
        field = dijkstra_geodesic(mesh, 0)
        np.testing.assert_allclose(field.distance, oracle[0], atol=1e-12)
        # corner-to-corner value specifically
        corner = mesh.face_count - 1
        assert field.distance[corner] == pytest.approx(oracle[0, corner])


class TestFitGaussian:
    def test_constant_sample_hits_floor(self):
        mu, sigma = fit_gaussian([2.0, 2.0, 2.0], sigma_floor=1e-3)
        assert mu == 2.0
        assert sigma == 1e-3

    def test_two_point_sample(self):
        mu, sigma = fit_gaussian([0.0, 2.0])
        assert mu == 1.0
        assert sigma == 1.0

    def test_matches_two_pass_oracle(self):
        rng = np.random.default_rng(42)
        values = rng.normal(3.5, 1.7, size=1000)
        mu, sigma = fit_gaussian(values)
        # independent two-pass summation oracle
        total = 0.0
        for v in values:
            total += v
        mean = total / len(values)
        sq = 0.0
        for v in values:
            sq += (v - mean) ** 2
        std = np.sqrt(sq / len(values))
        assert mu == pytest.approx(mean, rel=1e-9)
        assert sigma == pytest.approx(std, rel=1e-9)

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            fit_gaussian([])


class TestGaussianDensity:
    def test_peak_value(self):
        assert gaussian_density(0.0, 0.0, 1.0) == pytest.approx(
            1.0 / np.sqrt(2 * np.pi), abs=1e-12
        )

    def test_one_sigma_ratio(self):
        peak = gaussian_density(5.0, 5.0, 2.0)
        assert gaussian_density(7.0, 5.0, 2.0) == pytest.approx(
            peak * np.exp(-0.5), rel=1e-12
        )

    def test_integates_to_one(self):
        mu, sigma = 1.3, 0.7
        xs = np.linspace(mu - 8 * sigma, mu + 8 * sigma, 200001)
        ys = gaussian_density(xs, mu, sigma)
        integral = np.trapezoid(ys, xs)
        assert integral == pytest.approx(1.0, abs=1e-6)

    def test_symmetric_and_decreasing(self):
        d = np.linspace(0.0, 4.0, 50)
        up = gaussian_density(2.0 + d, 2.0, 0.9)
        down = gaussian_density(2.0 - d, 2.0, 0.9)
        np.testing.assert_allclose(up, down, rtol=1e-12)
        assert (np.diff(up) < 0).all()

    def test_invalid_sigma(self):
        with pytest.raises(ValueError):
            gaussian_density(0.0, 0.0, 0.0)
