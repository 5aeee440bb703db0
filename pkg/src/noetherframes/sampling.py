"""Seeded random fixtures shared by the test suite and the verify command.

Paths are generated from random invariant data and transported frames
rather than raw random points, so every sampled window is nondegenerate
by construction and stays clear of the epsilon guards.
"""

from __future__ import annotations

import numpy as np

from .errors import ProjectivePole
from .frames import InvariantSequence, LatticePath, frame_at, path_from_invariants
from .groups import ActionKind, SA2Element, SL2Element, act


def default_rng(rng=None) -> np.random.Generator:
    if rng is None:
        return np.random.default_rng(0)
    if isinstance(rng, (int, np.integer)):
        return np.random.default_rng(int(rng))
    return rng


def _signed(rng, low, high):
    return float(rng.choice((-1.0, 1.0)) * rng.uniform(low, high))


def random_element(kind: ActionKind, rng=None):
    """Random group element with entries of moderate size."""
    rng = default_rng(rng)
    a = _signed(rng, 0.5, 1.5)
    b = float(rng.uniform(-0.8, 0.8))
    c = float(rng.uniform(-0.8, 0.8))
    g = SL2Element(a, b, c, (1.0 + b * c) / a)
    if kind is ActionKind.SA2:
        return SA2Element(g, float(rng.uniform(-1, 1)), float(rng.uniform(-1, 1)))
    return g


def random_transform_for(kind: ActionKind, path: LatticePath, rng=None):
    """Random element that keeps the given path away from poles."""
    rng = default_rng(rng)
    for _ in range(100):
        g = random_element(kind, rng)
        if kind is not ActionKind.SL2_PROJECTIVE:
            return g
        try:
            if all(
                abs(g.c * p[0] + g.d) > 0.1 for p in path.points
            ):
                return g
        except ProjectivePole:  # pragma: no cover - guarded above
            continue
    raise RuntimeError("could not sample a pole-free transform")


def random_invariants(kind: ActionKind, rng, count: int, offset: int = 0) -> InvariantSequence:
    """Random invariant data bounded away from every degenerate locus."""
    rng = default_rng(rng)
    if kind is ActionKind.SL2_LINEAR:
        kappa = tuple(_signed(rng, 0.5, 1.5) for _ in range(count))
        tau = tuple(_signed(rng, 0.5, 1.8) for _ in range(count))
        return InvariantSequence(offset, kappa, tau)
    if kind is ActionKind.SA2:
        kappa = tuple(_signed(rng, 0.5, 1.5) for _ in range(count))
        tau = tuple(_signed(rng, 0.4, 1.4) for _ in range(count))
        return InvariantSequence(offset, kappa, tau)
    kappa = tuple(float(rng.uniform(-1.8, -0.2)) for _ in range(count))
    return InvariantSequence(offset, kappa, None)


def random_path(kind: ActionKind, rng=None, length: int = 8, offset: int = 0) -> LatticePath:
    """Nondegenerate random path built by frame transport of random invariants."""
    rng = default_rng(rng)
    inv = random_invariants(kind, rng, max(length - 1, 1), offset)
    if kind is ActionKind.SL2_PROJECTIVE:
        # seed with the frame of a well-separated decreasing triple
        for _ in range(50):
            x0 = 1.0 + float(rng.uniform(0.0, 0.8))
            x1 = float(rng.uniform(-0.3, 0.3))
            x2 = -1.0 - float(rng.uniform(0.0, 0.8))
            seed = frame_at(kind, LatticePath(offset, ((x0,), (x1,), (x2,))), offset)
            try:
                return path_from_invariants(kind, inv, seed, length)
            except ProjectivePole:
                continue
        raise RuntimeError("could not sample a pole-free projective path")
    seed = random_element(kind, rng)
    return path_from_invariants(kind, inv, seed, length)


def random_velocities(kind: ActionKind, rng, length: int, scale: float = 1.0):
    rng = default_rng(rng)
    dim = kind.point_dim
    return tuple(
        tuple(float(rng.uniform(-scale, scale)) for _ in range(dim))
        for _ in range(length)
    )


def bump_velocities(kind: ActionKind, rng, length: int, margin: int, scale: float = 1.0):
    """Velocities supported away from both path ends by ``margin`` sites."""
    rng = default_rng(rng)
    dim = kind.point_dim
    if length <= 2 * margin:
        raise ValueError("path too short for the requested margin")
    rows = []
    for i in range(length):
        if margin <= i < length - margin:
            rows.append(tuple(float(rng.uniform(-scale, scale)) for _ in range(dim)))
        else:
            rows.append((0.0,) * dim)
    return tuple(rows)


def random_path_with_velocities(
    kind: ActionKind, rng=None, length: int = 8, offset: int = 0, scale: float = 1.0
) -> LatticePath:
    rng = default_rng(rng)
    path = random_path(kind, rng, length, offset)
    return path.with_velocities(random_velocities(kind, rng, length, scale))
