"""The three group actions and their infinitesimal data.

Supported actions on lattice paths:

* ``sl2-linear``      unimodular linear maps of the plane, u -> g u
* ``sa2``             equi-affine maps, u -> g u + t with det g = 1
* ``sl2-projective``  Moebius maps of the line, x -> (a x + b)/(c x + d)

Group elements keep their natural parametrisation rather than a matrix
so that composition and inversion stay exact; matrices are derived on
demand. The adjoint matrices act on row vectors of vector-field
coefficients in the basis (v_a, v_b, v_c[, v_alpha, v_beta]) and
satisfy Ad(g h) = Ad(g) Ad(h).
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from . import config
from .errors import DimensionMismatch, KindMismatch, ProjectivePole
from .numeric import SmallMatrix, magnitude

_DET_TOL = 1e-10


class ActionKind(Enum):
    SL2_LINEAR = "sl2-linear"
    SA2 = "sa2"
    SL2_PROJECTIVE = "sl2-projective"

    @classmethod
    def from_tag(cls, tag: str) -> "ActionKind":
        for kind in cls:
            if kind.value == tag:
                return kind
        raise KindMismatch(f"unknown action tag {tag!r}")

    @property
    def point_dim(self) -> int:
        return 1 if self is ActionKind.SL2_PROJECTIVE else 2

    @property
    def group_dim(self) -> int:
        return 5 if self is ActionKind.SA2 else 3

    @property
    def invariant_names(self):
        """Generating invariants in the order their evolution system uses."""
        if self is ActionKind.SL2_LINEAR:
            return ("kappa", "tau")
        if self is ActionKind.SA2:
            return ("tau", "kappa")
        return ("kappa",)

    @property
    def point_window(self) -> int:
        """Points consumed by the widest generating invariant."""
        return 3 if self is ActionKind.SL2_LINEAR else 4


@dataclass(frozen=True)
class SL2Element:
    a: float
    b: float
    c: float
    d: float

    def __post_init__(self):
        det = self.a * self.d - self.b * self.c
        if magnitude(det - 1.0) > _DET_TOL:
            raise ValueError(f"determinant {det!r} is not 1 within {_DET_TOL}")

    def matrix(self) -> SmallMatrix:
        return SmallMatrix(((self.a, self.b), (self.c, self.d)))

    def inverse(self) -> "SL2Element":
        return SL2Element(self.d, -self.b, -self.c, self.a)

    @classmethod
    def from_matrix(cls, m: SmallMatrix) -> "SL2Element":
        if m.n != 2:
            raise DimensionMismatch("SL2 element needs a 2x2 matrix")
        return cls(m.rows[0][0], m.rows[0][1], m.rows[1][0], m.rows[1][1])


@dataclass(frozen=True)
class SA2Element:
    g: SL2Element
    alpha: float
    beta: float

    def matrix(self) -> SmallMatrix:
        g = self.g
        return SmallMatrix(
            (
                (g.a, g.b, self.alpha),
                (g.c, g.d, self.beta),
                (0.0, 0.0, 1.0),
            )
        )

    def inverse(self) -> "SA2Element":
        gi = self.g.inverse()
        return SA2Element(
            gi,
            -(gi.a * self.alpha + gi.b * self.beta),
            -(gi.c * self.alpha + gi.d * self.beta),
        )


def identity(kind: ActionKind):
    e = SL2Element(1.0, 0.0, 0.0, 1.0)
    return SA2Element(e, 0.0, 0.0) if kind is ActionKind.SA2 else e


def _require(kind: ActionKind, g):
    if kind is ActionKind.SA2:
        if not isinstance(g, SA2Element):
            raise KindMismatch("sa2 action needs an SA2Element")
    else:
        if not isinstance(g, SL2Element):
            raise KindMismatch(f"{kind.value} action needs an SL2Element")


def compose(kind: ActionKind, g, h):
    """Group product g h (h acts first)."""
    _require(kind, g)
    _require(kind, h)
    if kind is ActionKind.SA2:
        gg = compose(ActionKind.SL2_LINEAR, g.g, h.g)
        return SA2Element(
            gg,
            g.g.a * h.alpha + g.g.b * h.beta + g.alpha,
            g.g.c * h.alpha + g.g.d * h.beta + g.beta,
        )
    return SL2Element(
        g.a * h.a + g.b * h.c,
        g.a * h.b + g.b * h.d,
        g.c * h.a + g.d * h.c,
        g.c * h.b + g.d * h.d,
    )


def inverse(kind: ActionKind, g):
    _require(kind, g)
    return g.inverse()


def act(kind: ActionKind, g, point):
    """Apply a group element to a single point (tuple of point_dim)."""
    _require(kind, g)
    if len(point) != kind.point_dim:
        raise DimensionMismatch(f"point of length {len(point)} for {kind.value}")
    if kind is ActionKind.SL2_LINEAR:
        x, y = point
        return (g.a * x + g.b * y, g.c * x + g.d * y)
    if kind is ActionKind.SA2:
        x, y = point
        gg = g.g
        return (gg.a * x + gg.b * y + g.alpha, gg.c * x + gg.d * y + g.beta)
    (x,) = point
    den = g.c * x + g.d
    if magnitude(den) <= config.epsilon():
        raise ProjectivePole(f"point {x!r} is a pole of the Moebius map")
    return ((g.a * x + g.b) / den,)


def act_velocity(kind: ActionKind, g, point, velocity):
    """Push a velocity vector at ``point`` forward through the action."""
    _require(kind, g)
    if len(velocity) != kind.point_dim:
        raise DimensionMismatch("velocity length does not match the action")
    if kind is ActionKind.SL2_LINEAR:
        vx, vy = velocity
        return (g.a * vx + g.b * vy, g.c * vx + g.d * vy)
    if kind is ActionKind.SA2:
        vx, vy = velocity
        gg = g.g
        return (gg.a * vx + gg.b * vy, gg.c * vx + gg.d * vy)
    (x,) = point
    (v,) = velocity
    den = g.c * x + g.d
    if magnitude(den) <= config.epsilon():
        raise ProjectivePole(f"point {x!r} is a pole of the Moebius map")
    return (v / (den * den),)


def _sl2_adjoint_rows(a, b, c, d):
    return (
        (a * d + b * c, -a * c, b * d),
        (-2.0 * a * b, a * a, -b * b),
        (2.0 * c * d, -c * c, d * d),
    )


def adjoint_matrix(kind: ActionKind, g) -> SmallMatrix:
    """Adjoint action on row vectors of characteristic coefficients."""
    _require(kind, g)
    if kind is not ActionKind.SA2:
        return SmallMatrix(_sl2_adjoint_rows(g.a, g.b, g.c, g.d))
    a, b, c, d = g.g.a, g.g.b, g.g.c, g.g.d
    al, be = g.alpha, g.beta
    top = _sl2_adjoint_rows(a, b, c, d)
    # translation block: rows (alpha, beta) mix into the sl2 block through
    # M = alpha*[[-1,0,0],[0,0,-1]] + beta*[[0,-1,0],[1,0,0]] applied to Ad(g)
    row4 = (
        -al * top[0][0] - be * top[1][0],
        -al * top[0][1] - be * top[1][1],
        -al * top[0][2] - be * top[1][2],
        a,
        b,
    )
    row5 = (
        be * top[0][0] - al * top[2][0],
        be * top[0][1] - al * top[2][1],
        be * top[0][2] - al * top[2][2],
        c,
        d,
    )
    return SmallMatrix(
        (
            (top[0][0], top[0][1], top[0][2], 0.0, 0.0),
            (top[1][0], top[1][1], top[1][2], 0.0, 0.0),
            (top[2][0], top[2][1], top[2][2], 0.0, 0.0),
            row4,
            row5,
        )
    )


def characteristics(kind: ActionKind, point):
    """Rows of vector-field coefficients at a point, one row per coordinate.

    Row r lists the coefficient of d/d(coordinate r) for each basis
    vector field of the action.
    """
    if len(point) != kind.point_dim:
        raise DimensionMismatch(f"point of length {len(point)} for {kind.value}")
    if kind is ActionKind.SL2_LINEAR:
        x, y = point
        return ((x, y, 0.0), (-y, 0.0, x))
    if kind is ActionKind.SA2:
        x, y = point
        return ((x, y, 0.0, 1.0, 0.0), (-y, 0.0, x, 0.0, 1.0))
    (x,) = point
    return ((2.0 * x, 1.0, -x * x),)


# Images of the first window point(s) on the normalization cross-section.
NORMALIZED_POINT = {
    ActionKind.SL2_LINEAR: (1.0, 0.0),
    ActionKind.SA2: (0.0, 0.0),
    ActionKind.SL2_PROJECTIVE: (0.5,),
}


def characteristics_invariantized(kind: ActionKind):
    """Characteristic rows evaluated at the normalized first point."""
    return characteristics(kind, NORMALIZED_POINT[kind])
