"""Lattice paths, difference invariants, moving frames and curvature data.

A lattice path is a finite sequence of points indexed by consecutive
integer sites. For each action the package computes:

* the generating difference invariants (kappa, and tau for the planar
  actions), each anchored at the left end of its point window;
* the right moving frame rho_k determined by the normalization
  equations of the action (first window point to a fixed cross-section
  point, and so on);
* the Maurer-Cartan matrix K_k = rho_{k+1} rho_k^{-1}, expressed in
  closed form through the invariants;
* the invariantized velocities sigma and the curvature matrix
  N_k = (d rho_k/dt) rho_k^{-1} expressed through sigma.

Degenerate windows raise rather than return NaN.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional

from . import config
from .errors import (
    DegenerateInvariants,
    DegenerateWindow,
    DimensionMismatch,
    KindMismatch,
    NegativeRadicand,
    WindowOutOfRange,
)
from .groups import (
    ActionKind,
    NORMALIZED_POINT,
    SA2Element,
    SL2Element,
    act,
    act_velocity,
    compose,
)
from .numeric import Dual, SmallMatrix, checked_div, magnitude


@dataclass(frozen=True)
class LatticePath:
    """Points (and optionally velocities) on consecutive integer sites."""

    offset: int
    points: tuple
    velocities: Optional[tuple] = None

    def __post_init__(self):
        pts = tuple(tuple(p) for p in self.points)
        object.__setattr__(self, "points", pts)
        if not pts:
            raise DimensionMismatch("a path needs at least one point")
        dim = len(pts[0])
        if any(len(p) != dim for p in pts):
            raise DimensionMismatch("all points must have the same dimension")
        if self.velocities is not None:
            vels = tuple(tuple(v) for v in self.velocities)
            object.__setattr__(self, "velocities", vels)
            if len(vels) != len(pts) or any(len(v) != dim for v in vels):
                raise DimensionMismatch("velocities must mirror the points")

    def __len__(self):
        return len(self.points)

    @property
    def first_site(self) -> int:
        return self.offset

    @property
    def last_site(self) -> int:
        return self.offset + len(self.points) - 1

    def sites(self):
        return range(self.offset, self.offset + len(self.points))

    def _index(self, site: int) -> int:
        idx = site - self.offset
        if not 0 <= idx < len(self.points):
            raise WindowOutOfRange(site, "path point")
        return idx

    def point_at(self, site: int):
        return self.points[self._index(site)]

    def velocity_at(self, site: int):
        if self.velocities is None:
            raise WindowOutOfRange(site, "path carries no velocities")
        return self.velocities[self._index(site)]

    def with_velocities(self, velocities) -> "LatticePath":
        return replace(self, velocities=tuple(tuple(v) for v in velocities))

    def check_kind(self, kind: ActionKind) -> None:
        if len(self.points[0]) != kind.point_dim:
            raise KindMismatch(
                f"path points have dimension {len(self.points[0])}, "
                f"{kind.value} needs {kind.point_dim}"
            )


@dataclass(frozen=True)
class InvariantSequence:
    """Generating invariants of a path, anchored at window left ends."""

    offset: int
    kappa: tuple
    tau: Optional[tuple] = None

    def kappa_at(self, site: int):
        idx = site - self.offset
        if not 0 <= idx < len(self.kappa):
            raise WindowOutOfRange(site, "kappa")
        return self.kappa[idx]

    def tau_at(self, site: int):
        if self.tau is None:
            raise KindMismatch("this action has no tau invariant")
        idx = site - self.offset
        if not 0 <= idx < len(self.tau):
            raise WindowOutOfRange(site, "tau")
        return self.tau[idx]

    def kappa_last_site(self) -> int:
        return self.offset + len(self.kappa) - 1

    def tau_last_site(self) -> int:
        if self.tau is None:
            raise KindMismatch("this action has no tau invariant")
        return self.offset + len(self.tau) - 1

    def value_at(self, name: str, site: int):
        if name == "kappa":
            return self.kappa_at(site)
        if name == "tau":
            return self.tau_at(site)
        raise KeyError(name)


@dataclass(frozen=True)
class SigmaVector:
    """Invariantized velocity components at one site.

    Planar actions carry (sigma^x, sigma^y); the projective action
    carries (sigma_0, sigma_1, sigma_2), the frame at the site applied
    to the velocities at the site and its two successors.
    """

    site: int
    components: tuple


def _cross(p, q):
    return p[0] * q[1] - p[1] * q[0]


def _area2(p, q, r):
    """Twice the signed triangle area, cross(q - p, r - p)."""
    return (q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0])


def invariants_of(kind: ActionKind, path: LatticePath) -> InvariantSequence:
    """Generating difference invariants of a path.

    Raises DegenerateWindow at the first site whose window fails the
    nondegeneracy condition of the action.
    """
    path.check_kind(kind)
    pts = path.points
    n = len(pts)
    if n < kind.point_window:
        raise DimensionMismatch(
            f"path of {n} points is shorter than the invariant window "
            f"({kind.point_window}) of {kind.value}"
        )
    eps = config.epsilon()
    if kind is ActionKind.SL2_LINEAR:
        tau = []
        for i in range(n - 1):
            t = _cross(pts[i], pts[i + 1])
            if magnitude(t) <= eps:
                raise DegenerateWindow(path.offset + i, "consecutive points are collinear")
            tau.append(t)
        kappa = tuple(
            _cross(pts[i], pts[i + 2]) / tau[i + 1] for i in range(n - 2)
        )
        return InvariantSequence(path.offset, kappa, tuple(tau))
    if kind is ActionKind.SA2:
        kappa = []
        for i in range(n - 2):
            k = _area2(pts[i], pts[i + 1], pts[i + 2])
            if magnitude(k) <= eps:
                raise DegenerateWindow(path.offset + i, "three consecutive points are collinear")
            kappa.append(k)
        tau = tuple(
            _area2(pts[i], pts[i + 1], pts[i + 3]) / kappa[i + 1]
            for i in range(n - 3)
        )
        return InvariantSequence(path.offset, tuple(kappa), tau)
    kappa = []
    for i in range(n - 3):
        x0, x1, x2, x3 = (pts[i + j][0] for j in range(4))
        d03 = x0 - x3
        d21 = x2 - x1
        if magnitude(d03) <= eps or magnitude(d21) <= eps:
            raise DegenerateWindow(path.offset + i, "cross-ratio denominator vanishes")
        kappa.append(((x0 - x1) * (x2 - x3)) / (d03 * d21))
    return InvariantSequence(path.offset, tuple(kappa), None)


def frame_at(kind: ActionKind, path: LatticePath, site: int, complex_ok: bool = False):
    """Right moving frame at a site, an element of the acting group.

    The frame solves the normalization equations of the action on the
    window starting at ``site``; it is right equivariant,
    rho(g.z) = rho(z) g^{-1} (for the projective action up to the
    overall matrix sign, which acts trivially).
    """
    path.check_kind(kind)
    eps = config.epsilon()
    if kind is ActionKind.SL2_LINEAR:
        x0, y0 = path.point_at(site)
        x1, y1 = path.point_at(site + 1)
        tau = x0 * y1 - x1 * y0
        if magnitude(tau) <= eps:
            raise DegenerateWindow(site, "consecutive points are collinear")
        return SL2Element(y1 / tau, -x1 / tau, -y0, x0)
    if kind is ActionKind.SA2:
        p0 = path.point_at(site)
        p1 = path.point_at(site + 1)
        p2 = path.point_at(site + 2)
        kappa = _area2(p0, p1, p2)
        if magnitude(kappa) <= eps:
            raise DegenerateWindow(site, "three consecutive points are collinear")
        x0, y0 = p0
        x1, y1 = p1
        x2, y2 = p2
        g = SL2Element((y2 - y0) / kappa, (x0 - x2) / kappa, y0 - y1, x1 - x0)
        return SA2Element(g, (x2 * y0 - x0 * y2) / kappa, x0 * y1 - x1 * y0)
    x0 = path.point_at(site)[0]
    x1 = path.point_at(site + 1)[0]
    x2 = path.point_at(site + 2)[0]
    d01 = x0 - x1
    d12 = x1 - x2
    d02 = x0 - x2
    if min(magnitude(d01), magnitude(d12), magnitude(d02)) <= eps:
        raise DegenerateWindow(site, "window points are not pairwise distinct")
    radicand = d02 / (d01 * d12)
    s = _frame_sqrt(radicand, site, complex_ok)
    return SL2Element(
        s * 0.5,
        -s * x1 * 0.5,
        s * (x2 - 2.0 * x1 + x0) / d02,
        s * (x0 * x1 - 2.0 * x0 * x2 + x1 * x2) / d02,
    )


def _frame_sqrt(radicand, site, complex_ok):
    from .numeric import scalar_sqrt

    if complex_ok:
        base = radicand.primal if isinstance(radicand, Dual) else radicand
        if not isinstance(base, complex):
            radicand = (
                Dual(complex(radicand.primal), complex(radicand.tangent))
                if isinstance(radicand, Dual)
                else complex(radicand)
            )
        return scalar_sqrt(radicand)
    primal = radicand.primal if isinstance(radicand, Dual) else radicand
    if isinstance(primal, complex):
        raise KindMismatch("complex path data needs complex_ok=True")
    if primal <= config.epsilon():
        raise NegativeRadicand(site, "frame radicand is not positive")
    return scalar_sqrt(radicand)


def maurer_cartan_element(
    kind: ActionKind, inv: InvariantSequence, site: int, complex_ok: bool = False
):
    """K_k = rho_{k+1} rho_k^{-1} as a group element, from the invariants."""
    if kind is ActionKind.SL2_LINEAR:
        kappa = inv.kappa_at(site)
        tau = inv.tau_at(site)
        inv_tau = checked_div(1.0, tau, DegenerateInvariants, f"tau at site {site}")
        return SL2Element(kappa, inv_tau, -tau, 0.0)
    if kind is ActionKind.SA2:
        kappa = inv.kappa_at(site)
        tau = inv.tau_at(site)
        ratio = checked_div(1.0 + tau, kappa, DegenerateInvariants, f"kappa at site {site}")
        g = SL2Element(tau, ratio, -kappa, -1.0)
        return SA2Element(g, -tau, kappa)
    kappa = inv.kappa_at(site)
    den = checked_div(1.0, 4.0 * kappa, DegenerateInvariants, f"kappa at site {site}")
    radicand = (kappa - 1.0) * den
    if not complex_ok:
        primal = radicand.primal if isinstance(radicand, Dual) else radicand
        if isinstance(primal, complex):
            raise KindMismatch("complex invariants need complex_ok=True")
        if primal <= config.epsilon():
            raise DegenerateInvariants(
                site, "(kappa-1)/(4 kappa) is not positive; no real frame transport"
            )
    from .numeric import scalar_sqrt

    if complex_ok and not isinstance(
        radicand.primal if isinstance(radicand, Dual) else radicand, complex
    ):
        radicand = (
            Dual(complex(radicand.primal), complex(radicand.tangent))
            if isinstance(radicand, Dual)
            else complex(radicand)
        )
    s = scalar_sqrt(radicand)
    slope = checked_div(
        6.0 * kappa + 2.0, kappa - 1.0, DegenerateInvariants, f"kappa-1 at site {site}"
    )
    return SL2Element(s, s * 0.5, -s * slope, s)


def maurer_cartan(
    kind: ActionKind, inv: InvariantSequence, site: int, complex_ok: bool = False
) -> SmallMatrix:
    """Maurer-Cartan matrix at a site (2x2, or 3x3 for the affine action)."""
    return maurer_cartan_element(kind, inv, site, complex_ok).matrix()


def sigma_at(kind: ActionKind, path: LatticePath, site: int) -> SigmaVector:
    """Invariantized velocities: the frame at ``site`` applied to path velocities."""
    path.check_kind(kind)
    if path.velocities is None:
        raise KindMismatch("sigma needs a path with velocities")
    rho = frame_at(kind, path, site)
    if kind is ActionKind.SL2_PROJECTIVE:
        comps = tuple(
            act_velocity(kind, rho, path.point_at(site + j), path.velocity_at(site + j))[0]
            for j in range(3)
        )
        return SigmaVector(site, comps)
    comps = act_velocity(kind, rho, path.point_at(site), path.velocity_at(site))
    return SigmaVector(site, tuple(comps))


def curvature_matrix(
    kind: ActionKind,
    path: LatticePath,
    site: int,
    literal_projective_entry: bool = False,
) -> SmallMatrix:
    """Curvature matrix N_k = (d rho_k/dt) rho_k^{-1} through sigma.

    The closed forms used here are validated by the identity
    dK_k/dt = N_{k+1} K_k - K_k N_k; ``literal_projective_entry``
    switches the projective matrix to the uncorrected variant (lower
    left 2 sigma_0 - 2 sigma_1 and diagonal (sigma_1 - sigma_0)/2),
    which fails that identity and is kept only for comparison.
    """
    if kind is ActionKind.SL2_LINEAR:
        s0 = sigma_at(kind, path, site).components
        s1 = sigma_at(kind, path, site + 1).components
        x0, y0 = path.point_at(site)
        x1, y1 = path.point_at(site + 1)
        tau = x0 * y1 - x1 * y0
        return SmallMatrix(
            (
                (-s0[0], s1[1] / (tau * tau)),
                (-s0[1], s0[0]),
            )
        )
    if kind is ActionKind.SA2:
        inv = invariants_of(kind, path)
        k0 = maurer_cartan(kind, inv, site)
        k1 = maurer_cartan(kind, inv, site + 1)
        s0 = sigma_at(kind, path, site).components
        s1 = sigma_at(kind, path, site + 1).components
        s2 = sigma_at(kind, path, site + 2).components
        v1 = k0.inverse().mul_vec((s1[0], s1[1], 0.0))
        v2 = k0.inverse().mul_vec(k1.inverse().mul_vec((s2[0], s2[1], 0.0)))
        ix1, iy1 = v1[0], v1[1]
        ix2 = v2[0]
        kappa = inv.kappa_at(site)
        return SmallMatrix(
            (
                (s0[0] - ix1, (s0[0] - ix2) / kappa, -s0[0]),
                (s0[1] - iy1, ix1 - s0[0], -s0[1]),
                (0.0, 0.0, 0.0),
            )
        )
    s = sigma_at(kind, path, site).components
    if literal_projective_entry:
        diag = (s[1] - s[0]) * 0.5
        lower = 2.0 * s[0] - 2.0 * s[1]
    else:
        diag = (s[2] - s[0]) * 0.5
        lower = 2.0 * s[0] - 4.0 * s[1] + 2.0 * s[2]
    return SmallMatrix(((diag, -s[1]), (lower, -diag)))


def curvature_from_frames(kind: ActionKind, path: LatticePath, site: int) -> SmallMatrix:
    """N_k by differentiating the frame directly under a dual-number lift.

    Independent of the closed forms in curvature_matrix; the two must
    agree wherever both are defined.
    """
    rho_dual = frame_at(kind, lifted_path(path), site).matrix()
    rho_dot = rho_dual.map_entries(lambda e: e.tangent if isinstance(e, Dual) else 0.0)
    rho = rho_dual.map_entries(lambda e: e.primal if isinstance(e, Dual) else e)
    return rho_dot @ rho.inverse()


def path_from_invariants(
    kind: ActionKind, inv: InvariantSequence, seed_frame, length: int
) -> LatticePath:
    """Rebuild a path from invariants by frame transport.

    Frames follow rho_{k+1} = K_k rho_k from ``seed_frame``; each point
    is the frame inverse applied to the normalized first point of the
    cross-section. Any group element is a valid seed; different seeds
    give group translates of the same path.
    """
    if length < 1:
        raise DimensionMismatch("length must be at least 1")
    target = NORMALIZED_POINT[kind]
    rho = seed_frame
    points = []
    for i in range(length):
        points.append(act(kind, rho.inverse(), target))
        if i + 1 < length:
            k_el = maurer_cartan_element(kind, inv, inv.offset + i)
            rho = compose(kind, k_el, rho)
    return LatticePath(inv.offset, tuple(points))


def transform_path(kind: ActionKind, g, path: LatticePath) -> LatticePath:
    """Apply a group element to every point (and velocity) of a path."""
    path.check_kind(kind)
    points = tuple(act(kind, g, p) for p in path.points)
    velocities = None
    if path.velocities is not None:
        velocities = tuple(
            act_velocity(kind, g, p, v) for p, v in zip(path.points, path.velocities)
        )
    return LatticePath(path.offset, points, velocities)


def lifted_path(path: LatticePath) -> LatticePath:
    """Path with points lifted to duals whose tangents are the velocities."""
    if path.velocities is None:
        raise KindMismatch("dual lift needs velocities")
    points = tuple(
        tuple(Dual(x, vx) for x, vx in zip(p, v))
        for p, v in zip(path.points, path.velocities)
    )
    return LatticePath(path.offset, points)


def matrix_difference(kind: ActionKind, left: SmallMatrix, right: SmallMatrix) -> float:
    """Max entry deviation; the projective action compares modulo matrix sign.

    Projective frames represent Moebius maps, so +-rho act identically and
    frame products determine K only up to the center. Every invariant
    quantity built from frames (Ad, sigma, N) is quadratic in the entries
    and does not see the sign.
    """
    dev = left.max_abs_diff(right)
    if kind is ActionKind.SL2_PROJECTIVE:
        dev = min(dev, left.max_abs_diff(right.scaled(-1.0)))
    return dev


def frame_difference(kind: ActionKind, left, right) -> float:
    """Max entry deviation between two frames, modulo the projective sign."""
    return matrix_difference(kind, left.matrix(), right.matrix())


@dataclass(frozen=True)
class FrameIdentityReport:
    trials: int
    frame_equivariance: float
    invariant_invariance: float
    maurer_cartan: float

    def max_deviation(self) -> float:
        return max(self.frame_equivariance, self.invariant_invariance, self.maurer_cartan)


def verify_frame_identities(
    kind: ActionKind, path: LatticePath, trials: int, rng=None
) -> FrameIdentityReport:
    """Numerically exercise equivariance, invariance and K = rho_1 rho_0^{-1}."""
    from .sampling import default_rng, random_transform_for

    rng = default_rng(rng)
    inv = invariants_of(kind, path)
    frame_sites = range(
        path.first_site, path.last_site - (kind.point_window - 2)
    )
    frames = {k: frame_at(kind, path, k) for k in frame_sites}

    mc_dev = 0.0
    for k in frame_sites:
        if k + 1 not in frames:
            continue
        product = compose(kind, frames[k + 1], frames[k].inverse())
        mc_dev = max(
            mc_dev,
            matrix_difference(kind, product.matrix(), maurer_cartan(kind, inv, k)),
        )

    frame_dev = 0.0
    inv_dev = 0.0
    for _ in range(trials):
        g = random_transform_for(kind, path, rng)
        moved = transform_path(kind, g, path)
        moved_inv = invariants_of(kind, moved)
        inv_dev = max(
            inv_dev,
            max(
                magnitude(a - b)
                for a, b in zip(moved_inv.kappa, inv.kappa)
            ),
        )
        if inv.tau is not None:
            inv_dev = max(
                inv_dev,
                max(magnitude(a - b) for a, b in zip(moved_inv.tau, inv.tau)),
            )
        g_inv = g.inverse()
        for k in frame_sites:
            expected = compose(kind, frames[k], g_inv)
            frame_dev = max(
                frame_dev,
                frame_difference(kind, frame_at(kind, moved, k), expected),
            )
    return FrameIdentityReport(trials, frame_dev, inv_dev, mc_dev)
