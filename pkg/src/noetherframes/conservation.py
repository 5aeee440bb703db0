"""Conserved quantities attached to invariant Lagrangians.

Summation by parts of the invariant variational identity leaves
telescoping boundary terms. On a path satisfying the invariantized
Euler-Lagrange equations these assemble into a row vector of
group-algebra coefficients that is the same at every site: the
discrete conservation law. The pieces, built here site by site:

* boundary coefficients, the scalar multipliers of the shifted
  velocity components inside the telescoped boundary term;
* the conserved vector in invariant form, transporting each lag
  through adjoint factors of the transport matrices;
* the constants themselves, closing with the adjoint of the frame,
  together with their drift across the path;
* scalar first integrals, one polynomial in the constants per action,
  equal site by site to the same polynomial in the conserved vector.

Everything is a direct expansion of the syzygy operator table; no
equation solving happens here.
"""

from __future__ import annotations

from dataclasses import dataclass

from .frames import (
    InvariantSequence,
    LatticePath,
    frame_at,
    invariants_of,
    maurer_cartan_element,
)
from .groups import ActionKind, adjoint_matrix, characteristics_invariantized
from .numeric import SmallMatrix, magnitude
from .operators import build_syzygy
from .variational import (
    _COEFF_LOOKAHEAD,
    _MAX_SHIFT,
    InvariantLagrangian,
    euler_component,
    euler_sites,
)


def _column_characteristics(kind: ActionKind) -> dict:
    """Invariantized characteristic row backing each syzygy column."""
    rows = characteristics_invariantized(kind)
    if kind is ActionKind.SL2_PROJECTIVE:
        return {"sigma_0": rows[0]}
    return {"sigma_x": rows[0], "sigma_y": rows[1]}


def boundary_coefficients(
    kind: ActionKind,
    lagr: InvariantLagrangian,
    inv: InvariantSequence,
    literal_affine_coefficient: bool = False,
) -> dict:
    """Boundary-term coefficients keyed by (column label, lag).

    The entry at (col, j) is the site function multiplying the j-th
    shift of the velocity component for that column inside the
    telescoped boundary term: the sum over rows and over operator
    shifts k > j of c_k(n + j - k) E_row(n + j - k).
    """
    h = build_syzygy(
        kind, inv, literal_affine_coefficient=literal_affine_coefficient
    )
    eulers = {
        name: euler_component(lagr, inv, name) for name in kind.invariant_names
    }
    out = {}
    for ci, col in enumerate(h.col_labels):
        contributions = {}
        for ri, name in enumerate(h.row_labels):
            for shift, coeff in h.rows[ri][ci].terms:
                for lag in range(shift):
                    contributions.setdefault(lag, []).append(
                        (shift, coeff, name)
                    )
        for lag, terms in contributions.items():

            def coefficient(site, terms=terms, lag=lag):
                total = 0.0
                for shift, coeff, name in terms:
                    m = site + lag - shift
                    total = total + coeff(m) * eulers[name](m)
                return total

            out[(col, lag)] = coefficient
    return out


def _row_times(row, matrix: SmallMatrix):
    n = matrix.n
    return tuple(
        sum(row[i] * matrix.rows[i][j] for i in range(n)) for j in range(n)
    )


def conserved_vector(
    kind: ActionKind,
    lagr: InvariantLagrangian,
    inv: InvariantSequence,
    literal_affine_coefficient: bool = False,
):
    """Site function for the conserved vector in invariant form.

    Lag j contributes its boundary coefficient times the characteristic
    row of its column, transported by the adjoints of the transport
    matrices at sites site + j - 1 down to site.
    """
    coeffs = boundary_coefficients(
        kind, lagr, inv, literal_affine_coefficient=literal_affine_coefficient
    )
    columns = _column_characteristics(kind)
    max_lag = max(lag for _, lag in coeffs)
    dim = kind.group_dim

    def vector(site):
        total = [0.0] * dim
        transport = SmallMatrix.identity(dim)
        for lag in range(max_lag + 1):
            if lag > 0:
                step = adjoint_matrix(
                    kind, maurer_cartan_element(kind, inv, site + lag - 1)
                )
                transport = step @ transport
            for col, row in columns.items():
                fn = coeffs.get((col, lag))
                if fn is None:
                    continue
                weight = fn(site)
                moved = _row_times(row, transport)
                for i in range(dim):
                    total[i] = total[i] + weight * moved[i]
        return tuple(total)

    return vector


def conserved_sites(
    kind: ActionKind, lagr: InvariantLagrangian, path: LatticePath
) -> range:
    """Sites where the conserved vector and the constants are defined."""
    inv = invariants_of(kind, path)
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
        path.last_site - (kind.point_window - 2),
    )
    return range(lo, hi + 1)


@dataclass(frozen=True)
class ConservationRecord:
    """Conserved vectors and constants along a path.

    ``constants[i]`` is the conserved vector at ``sites[i]`` pushed
    through the adjoint of the frame there; on an extremal path all
    rows agree and ``drift`` is the rounding left over.
    """

    sites: tuple
    vectors: tuple
    constants: tuple
    constant: tuple
    drift: float

    def first_integral(self, kind: ActionKind) -> float:
        return first_integral(kind, self.constant)


def noether_constant(
    kind: ActionKind,
    lagr: InvariantLagrangian,
    path: LatticePath,
    literal_affine_coefficient: bool = False,
) -> ConservationRecord:
    """Evaluate the conservation law along the whole path."""
    inv = invariants_of(kind, path)
    vector = conserved_vector(
        kind, lagr, inv, literal_affine_coefficient=literal_affine_coefficient
    )
    sites = conserved_sites(kind, lagr, path)
    vectors = []
    constants = []
    for site in sites:
        v = vector(site)
        vectors.append(v)
        rho = frame_at(kind, path, site)
        constants.append(_row_times(v, adjoint_matrix(kind, rho)))
    head = constants[0]
    drift = max(
        magnitude(row[i] - head[i]) for row in constants for i in range(len(head))
    )
    return ConservationRecord(
        sites=tuple(sites),
        vectors=tuple(vectors),
        constants=tuple(constants),
        constant=head,
        drift=drift,
    )


def structure_defect(
    kind: ActionKind,
    lagr: InvariantLagrangian,
    path: LatticePath,
    literal_affine_coefficient: bool = False,
) -> float:
    """Residual of the invariant-level constancy relation.

    Constancy of the conserved constants is equivalent to the
    conserved vector at a site matching its successor transported back
    by one adjoint factor; this checks that form directly, without
    touching the frames.
    """
    inv = invariants_of(kind, path)
    vector = conserved_vector(
        kind, lagr, inv, literal_affine_coefficient=literal_affine_coefficient
    )
    sites = conserved_sites(kind, lagr, path)
    worst = 0.0
    for site in sites[:-1]:
        here = vector(site)
        pulled = _row_times(
            vector(site + 1),
            adjoint_matrix(kind, maurer_cartan_element(kind, inv, site)),
        )
        worst = max(
            worst,
            max(magnitude(here[i] - pulled[i]) for i in range(len(here))),
        )
    return worst


def first_integral(kind: ActionKind, coefficients) -> float:
    """Polynomial of the constants that the evolution leaves fixed.

    The same polynomial applied to the conserved vector gives a
    site-independent sequence on extremals, because it is unchanged by
    every adjoint factor of the action.
    """
    if kind is ActionKind.SA2:
        v1, v2, v3, v4, v5 = coefficients
        return v1 * v4 * v5 + v2 * v5 * v5 - v3 * v4 * v4
    v1, v2, v3 = coefficients
    return v1 * v1 + 4.0 * v2 * v3


def first_integral_profile(
    kind: ActionKind,
    lagr: InvariantLagrangian,
    path: LatticePath,
    literal_affine_coefficient: bool = False,
) -> tuple:
    """First-integral values computed from the conserved vector sitewise."""
    inv = invariants_of(kind, path)
    vector = conserved_vector(
        kind, lagr, inv, literal_affine_coefficient=literal_affine_coefficient
    )
    return tuple(
        first_integral(kind, vector(site))
        for site in conserved_sites(kind, lagr, path)
    )
