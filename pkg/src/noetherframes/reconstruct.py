"""Closed-form path recovery from solved invariants and constants.

Once the Euler-Lagrange equations are solved in invariant form, the
conservation law turns back into algebra. Writing the constants as the
conserved vector pushed through the adjoint of the frame and fixing
the frame normalization, the unknown frame entries obey two-term
linear recurrences whose coefficient matrices all share one constant
pair of eigenvectors. The whole path then comes out of running
products of scalar eigenvalue factors plus a handful of integration
seeds:

* unimodular-linear action: the lower frame row propagates through a
  diagonalized product; points are read off that row directly;
* equi-affine action: one scalar frame entry obeys a first-order
  recurrence, the rest of the frame follows linearly, and each point
  solves a small linear system built from the constants;
* projective action: same diagonalized product as the linear case with
  eigenvalue factors built from the transport square root, and points
  come from a quotient of frame entries.

A negative discriminant of the constants sends the products through
complex values; the recovered points must still be real, and any
imaginary residue above tolerance is an error, never silently
dropped.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import config
from .conservation import conserved_sites, conserved_vector, first_integral, noether_constant
from .errors import (
    DegenerateConstants,
    WindowOutOfRange,
    ZeroDenominator,
    ZeroV2,
    ZeroV45,
)
from .frames import (
    InvariantSequence,
    LatticePath,
    frame_at,
    invariants_of,
    maurer_cartan_element,
)
from .groups import ActionKind, SA2Element, SL2Element, adjoint_matrix
from .numeric import imag_norm, magnitude, real_part, scalar_sqrt
from .variational import InvariantLagrangian, euler_sites, _COEFF_LOOKAHEAD, _MAX_SHIFT

# running eigenvalue products beyond this magnitude stop the recursion
# before floats overflow; paths this unbalanced are not recoverable
_PRODUCT_CAP = 1e120


@dataclass(frozen=True)
class ReconstructionData:
    """Everything the closed-form recurrences consume.

    ``vectors[i]`` is the conserved vector at site ``start + i``; the
    ``constant`` row is the conservation law those vectors close to.
    """

    kind: ActionKind
    invariants: InvariantSequence
    constant: tuple
    start: int
    vectors: tuple

    @property
    def sites(self) -> range:
        return range(self.start, self.start + len(self.vectors))

    def vector_at(self, site: int):
        if site not in self.sites:
            raise WindowOutOfRange(site, "conserved vector")
        return self.vectors[site - self.start]

    def consistency_defect(self) -> float:
        """Worst mismatch of the first integral between constants and vectors."""
        target = first_integral(self.kind, self.constant)
        return max(
            magnitude(first_integral(self.kind, v) - target) for v in self.vectors
        )

    def check(self, tolerance: float = 1e-8) -> None:
        target = first_integral(self.kind, self.constant)
        defect = self.consistency_defect()
        if defect > tolerance * (1.0 + magnitude(target)):
            raise DegenerateConstants(
                "constants and conserved vectors disagree on the first "
                f"integral by {defect!r}"
            )


def reconstruction_data(
    kind: ActionKind, lagr: InvariantLagrangian, path: LatticePath
) -> ReconstructionData:
    """Data for a round trip: invariants, vectors and constants of a path."""
    record = noether_constant(kind, lagr, path)
    return ReconstructionData(
        kind=kind,
        invariants=invariants_of(kind, path),
        constant=record.constant,
        start=record.sites[0],
        vectors=record.vectors,
    )


def reconstruction_data_from_invariants(
    kind: ActionKind,
    lagr: InvariantLagrangian,
    inv: InvariantSequence,
    constant,
) -> ReconstructionData:
    """Data built without a path, for invariants solved in closed form."""
    shift = _MAX_SHIFT[kind]
    look = _COEFF_LOOKAHEAD[kind]
    ranges = [euler_sites(lagr, inv, name) for name in kind.invariant_names]
    lo = max(r.start for r in ranges) + shift
    inv_last = inv.kappa_last_site()
    if inv.tau is not None:
        inv_last = min(inv_last, inv.tau_last_site())
    hi = min(
        min(r.stop for r in ranges),
        inv_last + 1 - look,
        inv_last - shift + 2,
    )
    vector = conserved_vector(kind, lagr, inv)
    return ReconstructionData(
        kind=kind,
        invariants=inv,
        constant=tuple(constant),
        start=lo,
        vectors=tuple(vector(site) for site in range(lo, hi + 1)),
    )


def reconstruction_seed(kind: ActionKind, frame):
    """Integration seeds read off a frame at the starting site."""
    if kind is ActionKind.SA2:
        return frame.g.c
    return (frame.c, frame.d)


def roundtrip_seed(data: ReconstructionData, path: LatticePath):
    return reconstruction_seed(
        data.kind, frame_at(data.kind, path, data.start, complex_ok=True)
    )


def _discriminant_root(constant):
    k1, k2, k3 = constant
    disc = k1 * k1 + 4.0 * k2 * k3
    if magnitude(disc) <= config.epsilon():
        raise DegenerateConstants("repeated eigenvalue; constants give no basis")
    if isinstance(disc, complex) or disc > 0.0:
        return scalar_sqrt(disc)
    return scalar_sqrt(complex(disc))


def _quadratic_seed_check(constant, v2, seed):
    """The lower frame row must sit on the conic the constants define."""
    k1, k2, k3 = constant
    c0, d0 = seed
    residual = k3 * c0 * c0 - k1 * c0 * d0 - k2 * d0 * d0 + v2
    scale = max(
        magnitude(k3 * c0 * c0),
        magnitude(k1 * c0 * d0),
        magnitude(k2 * d0 * d0),
        magnitude(v2),
        1.0,
    )
    if magnitude(residual) > 1e-6 * scale:
        raise DegenerateConstants(
            f"seed row violates the quadratic constraint by {magnitude(residual)!r}"
        )


def _lower_rows(kind, data, seed, length, factors):
    """(c_k, d_k) rows from the diagonalized running products."""
    k1, k2, k3 = data.constant
    mu = _discriminant_root(data.constant)
    if magnitude(k3) <= config.epsilon():
        raise DegenerateConstants("third constant vanishes; eigenbasis degenerates")
    if kind is ActionKind.SL2_LINEAR:
        q = ((k1 - mu, k1 + mu), (2.0 * k3, 2.0 * k3))
    else:
        q = ((mu + k1, mu - k1), (2.0 * k3, -2.0 * k3))
    det_q = q[0][0] * q[1][1] - q[0][1] * q[1][0]
    q_inv = (
        (q[1][1] / det_q, -q[0][1] / det_q),
        (-q[1][0] / det_q, q[0][0] / det_q),
    )
    c0, d0 = seed
    w = (
        q_inv[0][0] * c0 + q_inv[0][1] * d0,
        q_inv[1][0] * c0 + q_inv[1][1] * d0,
    )
    rows = []
    p1 = 1.0
    p2 = 1.0
    for k in range(length):
        rows.append(
            (
                q[0][0] * p1 * w[0] + q[0][1] * p2 * w[1],
                q[1][0] * p1 * w[0] + q[1][1] * p2 * w[1],
            )
        )
        if k + 1 < length:
            f1, f2 = factors(data.start + k, mu)
            p1 = p1 * f1
            p2 = p2 * f2
            if max(magnitude(p1), magnitude(p2)) > _PRODUCT_CAP:
                raise DegenerateConstants(
                    "running eigenvalue product overflowed; path is not "
                    "recoverable at this length"
                )
    return rows, mu


def _upper_row(constant, v, c, d, site):
    """(a_k, b_k) resolved linearly from the conservation equations."""
    k1, k2, k3 = constant
    v1, v2 = v[0], v[1]
    if magnitude(v2) <= config.epsilon():
        raise ZeroV2(site)
    a = (c * (k1 + v1) + 2.0 * k2 * d) / (2.0 * v2)
    b = (2.0 * c * k3 - (k1 - v1) * d) / (2.0 * v2)
    return a, b


def _strip(value, tolerance, site):
    if imag_norm(value) > tolerance:
        raise DegenerateConstants(
            f"imaginary residue {imag_norm(value)!r} at site {site}"
        )
    return real_part(value)


def _reconstruct_sl2_linear(data, seed, length, tolerance):
    inv = data.invariants

    def factors(site, mu):
        v = data.vector_at(site)
        if magnitude(v[1]) <= config.epsilon():
            raise ZeroV2(site)
        zeta = -inv.tau_at(site) / (2.0 * v[1])
        return zeta * (v[0] - mu), zeta * (v[0] + mu)

    _quadratic_seed_check(data.constant, data.vector_at(data.start)[1], seed)
    rows, _ = _lower_rows(ActionKind.SL2_LINEAR, data, seed, length, factors)
    points = []
    for k, (c, d) in enumerate(rows):
        site = data.start + k
        points.append(
            (_strip(d, tolerance, site), _strip(-c, tolerance, site))
        )
    return points


def _reconstruct_projective(data, seed, length, tolerance):
    inv = data.invariants

    def factors(site, mu):
        v = data.vector_at(site)
        if magnitude(v[1]) <= config.epsilon():
            raise ZeroV2(site)
        s = maurer_cartan_element(
            ActionKind.SL2_PROJECTIVE, inv, site, complex_ok=True
        ).a
        slope = (6.0 * inv.kappa_at(site) + 2.0) / (inv.kappa_at(site) - 1.0)
        lead = s / (2.0 * v[1])
        return (
            lead * (2.0 * v[1] - slope * (v[0] + mu)),
            lead * (2.0 * v[1] - slope * (v[0] - mu)),
        )

    _quadratic_seed_check(data.constant, data.vector_at(data.start)[1], seed)
    rows, _ = _lower_rows(ActionKind.SL2_PROJECTIVE, data, seed, length, factors)
    points = []
    for k, (c, d) in enumerate(rows):
        site = data.start + k
        a, b = _upper_row(
            data.constant, data.vector_at(site), c, d, site
        )
        den = 2.0 * a - c
        if magnitude(den) <= config.epsilon():
            raise ZeroDenominator(site)
        points.append((_strip((d - 2.0 * b) / den, tolerance, site),))
    return points


def _affine_point(constant, v, g_inverse_adjoint, site):
    """Solve the two translation unknowns from the invariant components.

    Of the three linear equations the best-conditioned pair is used;
    the remaining one is a hypothesis check on the constants.
    """
    k1, k2, k3, k4, k5 = constant
    lhs = []
    rhs = []
    for j in range(3):
        col = tuple(g_inverse_adjoint.rows[i][j] for i in range(3))
        base = k1 * col[0] + k2 * col[1] + k3 * col[2]
        lhs.append((-k4 * col[0] - k5 * col[2], -k4 * col[1] + k5 * col[0]))
        rhs.append(v[j] - base)
    best = None
    for i in range(3):
        for j in range(i + 1, 3):
            det = lhs[i][0] * lhs[j][1] - lhs[i][1] * lhs[j][0]
            if best is None or magnitude(det) > magnitude(best[0]):
                best = (det, i, j)
    det, i, j = best
    if magnitude(det) <= config.epsilon():
        raise DegenerateConstants(
            f"translation system is singular at site {site}"
        )
    x = (rhs[i] * lhs[j][1] - rhs[j] * lhs[i][1]) / det
    y = (lhs[i][0] * rhs[j] - lhs[j][0] * rhs[i]) / det
    spare = ({0, 1, 2} - {i, j}).pop()
    residual = magnitude(lhs[spare][0] * x + lhs[spare][1] * y - rhs[spare])
    scale = 1.0 + max(magnitude(rhs[m]) for m in range(3))
    if residual > 1e-6 * scale:
        raise DegenerateConstants(
            f"translation equations are inconsistent by {residual!r} at site {site}"
        )
    return x, y


def _reconstruct_sa2(data, seed, length, tolerance):
    inv = data.invariants
    k1, k2, k3, k4, k5 = data.constant
    if min(magnitude(k4), magnitude(k5)) <= config.epsilon():
        raise DegenerateConstants("translation constants vanish; frame row is free")
    c = seed
    points = []
    for k in range(length):
        site = data.start + k
        v = data.vector_at(site)
        if min(magnitude(v[3]), magnitude(v[4])) <= config.epsilon():
            raise ZeroV45(site)
        a = (k4 - v[4] * c) / v[3]
        d = (v[3] + k5 * c) / k4
        b = (k5 * a - v[4]) / k4
        flat = SL2Element(d, -b, -c, a)
        x, y = _affine_point(
            data.constant,
            v,
            adjoint_matrix(ActionKind.SL2_LINEAR, flat),
            site,
        )
        points.append((_strip(x, tolerance, site), _strip(y, tolerance, site)))
        if k + 1 < length:
            kappa = inv.kappa_at(site)
            c = (kappa * v[4] / v[3] - 1.0) * c - k4 * kappa / v[3]
    return points


def reconstruct_path(
    data: ReconstructionData,
    seed,
    length: int | None = None,
    imaginary_tolerance: float = 1e-9,
    check_tolerance: float = 1e-8,
) -> LatticePath:
    """Rebuild the path the closed-form recurrences determine.

    ``seed`` holds the integration constants: the lower frame row
    (c, d) at the starting site for the two SL(2) actions, the single
    scalar c for the equi-affine one. ``reconstruction_seed`` extracts
    them from a frame. The first-integral consistency of ``data`` is
    checked first; hypothesis violations raise DegenerateConstants.
    """
    if length is None:
        length = len(data.vectors)
    if length < 1 or length > len(data.vectors):
        raise WindowOutOfRange(
            data.start + length - 1, "reconstruction length"
        )
    data.check(check_tolerance)
    if data.kind is ActionKind.SL2_LINEAR:
        points = _reconstruct_sl2_linear(data, seed, length, imaginary_tolerance)
    elif data.kind is ActionKind.SA2:
        points = _reconstruct_sa2(data, seed, length, imaginary_tolerance)
    else:
        points = _reconstruct_projective(data, seed, length, imaginary_tolerance)
    return LatticePath(data.start, tuple(points))
