"""Fibonacci grids on the Poincare sphere and their covering angles."""
from __future__ import annotations

import logging
import math
from typing import Optional

import numpy as np
from scipy.spatial import ConvexHull, cKDTree

from src.config import DEFAULT_PROBES, DEFAULT_SEED
from src.models.errors import ParameterRangeError
from src.models.grid import DUPLICATE_TOL, PolarizationGrid, bloch_points
from src.models.polarization import PolarizationVector

logger = logging.getLogger(__name__)

GOLDEN_ANGLE = math.pi * (3.0 - math.sqrt(5.0))
PLANAR_TOL = 1e-12
COVER_TOL = 1e-9


def fibonacci_angles(n: int) -> np.ndarray:
    """Bloch angles of an n-point Fibonacci lattice that includes both poles.

    z_i = 1 - 2i/(n-1) and azimuth i times the golden angle; n=2 is the
    antipodal pair H, V.
    """
    i = np.arange(n, dtype=float)
    z = 1.0 - 2.0 * i / (n - 1)
    theta = np.arccos(np.clip(z, -1.0, 1.0))
    phi = np.mod(i * GOLDEN_ANGLE, 2.0 * math.pi)
    phi[np.isclose(np.sin(theta), 0.0, atol=1e-15)] = 0.0
    return np.column_stack([theta, phi])


def _chord_to_angle(chord: np.ndarray) -> np.ndarray:
    return 2.0 * np.arcsin(np.clip(chord / 2.0, 0.0, 1.0))


def _far_midpoints(points: np.ndarray, edges: np.ndarray) -> list[np.ndarray]:
    """-(p_i + p_j), the point of the i-j bisector farthest from both ends."""
    far = -(points[edges[:, 0]] + points[edges[:, 1]])
    norms = np.linalg.norm(far, axis=1)
    keep = norms > PLANAR_TOL
    return list(far[keep] / norms[keep, None])


def _candidate_centres(points: np.ndarray) -> np.ndarray:
    """Points of the sphere where the nearest-point distance can peak.

    The distance peaks at a vertex of the spherical Voronoi diagram or inside
    one of its edges, at the bisector point farthest from the edge's two
    sites. In general position the vertices are the outward normals of the
    convex hull facets and the edges follow the hull edges. Points on one
    circle have the circle's poles as vertices and neighbours around the
    circle as edges.
    """
    n = points.shape[0]
    if n == 1:
        return -points
    _, sv, vt = np.linalg.svd(points - points.mean(axis=0))
    scale = max(1.0, sv[0])
    if n >= 4 and sv[2] > PLANAR_TOL * scale:
        hull = ConvexHull(points)
        tri = hull.simplices
        edges = np.unique(np.sort(np.vstack([tri[:, [0, 1]], tri[:, [1, 2]], tri[:, [0, 2]]]), axis=1), axis=0)
        return np.array(list(hull.equations[:, :3]) + _far_midpoints(points, edges))
    if n >= 3:
        azimuth = np.arctan2(points @ vt[1], points @ vt[0])
        ring = np.argsort(azimuth)
        edges = np.column_stack([ring, np.roll(ring, -1)])
        return np.array([vt[2], -vt[2]] + _far_midpoints(points, edges))
    candidates = [vt[1]] + _far_midpoints(points, np.array([[0, 1]]))
    return np.array(candidates)


def covering_angle(
    points: np.ndarray,
    probes: int = DEFAULT_PROBES,
    seed: int = DEFAULT_SEED,
) -> tuple[float, int]:
    """Covering angle of unit Bloch vectors, cross-checked by random probes."""
    tree = cKDTree(points)
    centres = _candidate_centres(points)
    centres = centres / np.linalg.norm(centres, axis=1, keepdims=True)
    exact = float(_chord_to_angle(tree.query(centres)[0]).max())

    if probes > 0:
        rng = np.random.default_rng(seed)
        sample = rng.normal(size=(probes, 3))
        sample /= np.linalg.norm(sample, axis=1, keepdims=True)
        sampled = float(_chord_to_angle(tree.query(sample)[0]).max())
        if sampled > exact + 1e-9:
            logger.warning("Random sampling found covering %.6f above the hull value %.6f", sampled, exact)
            exact = sampled
    return min(exact, math.pi), probes


def build_grid(n: int, probes: int = DEFAULT_PROBES, seed: int = DEFAULT_SEED) -> PolarizationGrid:
    """Pole-inclusive Fibonacci grid with its covering angle."""
    if n < 2:
        raise ParameterRangeError(f"a grid needs n >= 2 points, got {n}")
    angles = fibonacci_angles(n)
    cover, count = covering_angle(bloch_points(angles), probes, seed)
    logger.info("Built %d-point grid, covering angle %.6f rad", n, cover)
    return PolarizationGrid(angles=angles, covering_angle=cover, probe_count=count)


def extend_grid(
    grid: PolarizationGrid,
    points: list[PolarizationVector],
    probes: Optional[int] = None,
    seed: int = DEFAULT_SEED,
) -> PolarizationGrid:
    """Insert points (skipping ones already present) and recompute the covering angle."""
    angles = [row for row in grid.angles]
    tree = cKDTree(grid.bloch)
    added = []
    for z in points:
        r = z.bloch_vector()
        if tree.query(r)[0] <= DUPLICATE_TOL or any(np.linalg.norm(r - a) <= DUPLICATE_TOL for a in added):
            continue
        added.append(r)
        angles.append(np.array(z.bloch_angles()))
    if not added:
        return grid
    merged = np.array(angles)
    count = (grid.probe_count or DEFAULT_PROBES) if probes is None else probes
    cover, count = covering_angle(bloch_points(merged), count, seed)
    logger.debug("Inserted %d grid points, covering angle now %.6f", len(added), cover)
    return PolarizationGrid(angles=merged, covering_angle=cover, probe_count=count)


def certify_grid(grid: PolarizationGrid, samples: int = 0, seed: int = DEFAULT_SEED) -> PolarizationGrid:
    """The grid with a covering angle no smaller than its own points give.

    A declared angle above the computed one is kept; one below it is
    replaced, since every slack bound is derived from it.
    """
    cover, _ = covering_angle(grid.bloch, samples, seed)
    if grid.covering_angle >= cover - COVER_TOL:
        return grid
    logger.warning("Grid declares covering angle %.6f but its points give %.6f; using %.6f",
                   grid.covering_angle, cover, cover)
    return PolarizationGrid(angles=grid.angles, covering_angle=cover, probe_count=max(grid.probe_count, samples))


def slack_bound(g: PolarizationGrid) -> float:
    """Largest change of a Malus probability when a pure state moves to its nearest grid point."""
    return math.sin(g.covering_angle / 2.0)
