"""Invariant Lagrangians and the invariantized Euler-Lagrange system.

A Lagrangian here is a scalar density in finite windows of the
generating invariants, summed over the base sites of a path. Its
difference Euler operator with respect to an invariant,

    E_name(L)(n) = sum_j (dL/d name_j)(n - j),

feeds the invariantized Euler-Lagrange system: one equation per sigma
component, assembled as the adjoint of the syzygy operator matrix
applied to the vector of Euler components (transposed entrywise, so
the equation dual to column j is sum_i (H_ij)* E_row_i).

All partial derivatives are dual-number seeded, never finite
differences; path_gradient differentiates the total action in the
original path coordinates the same way, and pairing_defect_total
checks the two routes against each other through the summed identity

    sum_n grad(n) . v(n) = sum_n sum_cols eq_col(n) sigma_col(n)

for velocities supported away from the path ends.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import DimensionMismatch, KindMismatch, WindowOutOfRange
from .frames import (
    InvariantSequence,
    LatticePath,
    invariants_of,
    sigma_at,
)
from .groups import ActionKind
from .numeric import Dual, magnitude
from .operators import ResidualReport, adjoint_of, build_syzygy


@dataclass(frozen=True)
class InvariantLagrangian:
    """Scalar density in windows of the generating invariants.

    ``body`` maps a dict {name: window tuple} to a scalar; ``windows``
    lists (name, length) pairs giving how many consecutive shifts of
    each invariant the body reads (length 0 marks an unused invariant).
    """

    body: object
    windows: tuple
    label: str = ""

    def __post_init__(self):
        object.__setattr__(self, "windows", tuple(tuple(w) for w in self.windows))
        if any(length < 0 for _, length in self.windows):
            raise DimensionMismatch("window lengths must be nonnegative")

    def names(self) -> tuple:
        return tuple(name for name, _ in self.windows)

    def window_of(self, name: str) -> int:
        for n, length in self.windows:
            if n == name:
                return length
        return 0

    def _window_values(self, inv: InvariantSequence, site: int):
        values = {}
        for name, length in self.windows:
            values[name] = tuple(
                inv.value_at(name, site + j) for j in range(length)
            )
        return values

    def value_at(self, inv: InvariantSequence, site: int):
        return self.body(self._window_values(inv, site))

    def partial_at(self, inv: InvariantSequence, name: str, shift: int, site: int):
        """dL/d name_shift at a base site, dual-number seeded.

        The whole window is lifted one derivative level before seeding,
        so sequence entries that already carry a tangent keep it; the
        partial then comes back as a Dual in the caller's direction
        instead of silently mixing the two derivatives.
        """
        if not 0 <= shift < self.window_of(name):
            return 0.0
        values = {}
        for wname, length in self.windows:
            row = []
            for j in range(length):
                one = 1.0 if wname == name and j == shift else 0.0
                row.append(Dual(inv.value_at(wname, site + j), one))
            values[wname] = tuple(row)
        out = self.body(values)
        return out.tangent if isinstance(out, Dual) else 0.0


def lagrangian_from_callable(body, windows, label: str = "") -> InvariantLagrangian:
    return InvariantLagrangian(body, tuple(windows), label)


def polynomial_lagrangian(terms, label: str = "") -> InvariantLagrangian:
    """Sum of monomials c * prod (name_shift)^power.

    ``terms`` is a tuple of (coefficient, factors) with factors a tuple
    of (name, shift, power); negative powers are allowed and stay
    invariant, they only narrow the usable invariant range.
    """
    terms = tuple(
        (c, tuple((name, int(shift), int(power)) for name, shift, power in factors))
        for c, factors in terms
    )
    lengths = {}
    for _, factors in terms:
        for name, shift, _ in factors:
            if shift < 0:
                raise DimensionMismatch("monomial shifts must be nonnegative")
            lengths[name] = max(lengths.get(name, 0), shift + 1)

    def body(values):
        total = 0.0
        for c, factors in terms:
            prod = c
            for name, shift, power in factors:
                prod = prod * values[name][shift] ** power
            total = total + prod
        return total

    windows = tuple(sorted(lengths.items()))
    return InvariantLagrangian(body, windows, label)


def coordinate_lagrangian(name: str, shift: int = 0) -> InvariantLagrangian:
    """The single invariant name_shift as a Lagrangian."""
    return polynomial_lagrangian(
        ((1.0, ((name, shift, 1),)),), label=f"{name}_{shift}"
    )


def _invariant_span(inv: InvariantSequence, name: str):
    if name == "kappa":
        return inv.offset, inv.kappa_last_site()
    if name == "tau":
        return inv.offset, inv.tau_last_site()
    raise KeyError(name)


def lagrangian_sites(lagr: InvariantLagrangian, inv: InvariantSequence) -> range:
    """Base sites where every window the body reads is available."""
    lo = inv.offset
    hi = None
    for name, length in lagr.windows:
        if length == 0:
            continue
        first, last = _invariant_span(inv, name)
        top = last - (length - 1)
        hi = top if hi is None else min(hi, top)
    if hi is None:
        raise DimensionMismatch("lagrangian reads no invariant")
    return range(lo, hi + 1)


def euler_component(lagr: InvariantLagrangian, inv: InvariantSequence, name: str):
    """E_name(L) as a site function, sum_j S_{-j}(dL/d name_j)."""
    base = lagrangian_sites(lagr, inv)
    width = lagr.window_of(name)
    cache = {}

    def component(site):
        if site not in cache:
            total = 0.0
            for j in range(width):
                m = site - j
                if m not in base:
                    raise WindowOutOfRange(site, f"euler component of {name}")
                total = total + lagr.partial_at(inv, name, j, m)
            cache[site] = total
        return cache[site]

    return component


def euler_sites(
    lagr: InvariantLagrangian, inv: InvariantSequence, name: str
) -> range:
    base = lagrangian_sites(lagr, inv)
    width = lagr.window_of(name)
    if width == 0:
        return base
    return range(base.start + width - 1, base.stop)


# widest invariant-shift lookahead of the syzygy coefficients
_COEFF_LOOKAHEAD = {
    ActionKind.SL2_LINEAR: 1,
    ActionKind.SA2: 2,
    ActionKind.SL2_PROJECTIVE: 2,
}

_MAX_SHIFT = {
    ActionKind.SL2_LINEAR: 2,
    ActionKind.SA2: 3,
    ActionKind.SL2_PROJECTIVE: 3,
}


def el_equations(
    kind: ActionKind,
    lagr: InvariantLagrangian,
    inv: InvariantSequence,
    literal_affine_coefficient: bool = False,
) -> dict:
    """Invariantized Euler-Lagrange expressions, one per sigma column.

    Returns {column label: site function}; a path is extremal when
    every expression vanishes on the interior.
    """
    h = build_syzygy(kind, inv, literal_affine_coefficient)
    eulers = {
        name: euler_component(lagr, inv, name) for name in h.row_labels
    }
    equations = {}
    for j, col in enumerate(h.col_labels):
        ops = tuple(
            (adjoint_of(h.rows[i][j]), eulers[name])
            for i, name in enumerate(h.row_labels)
        )

        def equation(site, ops=ops):
            total = 0.0
            for op, comp in ops:
                total = total + op.apply(comp, site)
            return total

        equations[col] = equation
    return equations


def el_sites(
    kind: ActionKind, lagr: InvariantLagrangian, inv: InvariantSequence
) -> range:
    """Sites where every term of every Euler-Lagrange expression exists."""
    names = ActionKind(kind).invariant_names
    lo = None
    hi = None
    for name in names:
        span = euler_sites(lagr, inv, name)
        lo = span.start if lo is None else max(lo, span.start)
        hi = span.stop - 1 if hi is None else min(hi, span.stop - 1)
    lo = lo + _MAX_SHIFT[kind]
    look = _COEFF_LOOKAHEAD[kind]
    for name in names:
        _, last = _invariant_span(inv, name)
        hi = min(hi, last - look)
    return range(lo, hi + 1)


def el_residual(
    kind: ActionKind,
    lagr: InvariantLagrangian,
    inv: InvariantSequence,
    literal_affine_coefficient: bool = False,
) -> ResidualReport:
    """Per-site magnitude of the Euler-Lagrange system, max over equations."""
    sites = tuple(el_sites(kind, lagr, inv))
    if not sites:
        raise DimensionMismatch("invariant sequence too short for any EL window")
    equations = el_equations(kind, lagr, inv, literal_affine_coefficient)
    residuals = tuple(
        max(magnitude(eq(n)) for eq in equations.values()) for n in sites
    )
    return ResidualReport(sites, residuals)


def total_action(
    kind: ActionKind, lagr: InvariantLagrangian, path: LatticePath
):
    """Sum of the density over every base site the path supports."""
    inv = invariants_of(kind, path)
    return sum(lagr.value_at(inv, n) for n in lagrangian_sites(lagr, inv))


def path_gradient(
    kind: ActionKind, lagr: InvariantLagrangian, path: LatticePath
) -> tuple:
    """Gradient of the total action in the path coordinates.

    One tuple per site, aligned with path.sites(); entry (n, i) is the
    derivative of the action with respect to coordinate i of the point
    at site n, each obtained from a dual-number seed.
    """
    base_points = tuple(tuple(p) for p in path.points)
    dim = len(base_points[0])
    grads = []
    for idx in range(len(base_points)):
        row = []
        for coord in range(dim):
            points = [list(p) for p in base_points]
            points[idx][coord] = Dual(points[idx][coord], 1.0)
            seeded = LatticePath(path.offset, tuple(tuple(p) for p in points))
            out = total_action(kind, lagr, seeded)
            row.append(out.tangent if isinstance(out, Dual) else 0.0)
        grads.append(tuple(row))
    return tuple(grads)


def pairing_defect_total(
    kind: ActionKind, lagr: InvariantLagrangian, path: LatticePath
) -> float:
    """Defect of sum grad . v = sum eq . sigma for interior velocities.

    The left side differentiates the action in path coordinates; the
    right side pairs the invariantized Euler-Lagrange expressions with
    the invariantized velocities. Velocities must vanish near the path
    ends so no boundary term survives; sigma windows touching nonzero
    velocities must lie inside el_sites, which bump-supported fields
    guarantee.
    """
    if path.velocities is None:
        raise KindMismatch("the pairing needs a path with velocities")
    grads = path_gradient(kind, lagr, path)
    left = 0.0
    for g, v in zip(grads, path.velocities):
        for gi, vi in zip(g, v):
            left = left + gi * vi

    inv = invariants_of(kind, path)
    equations = el_equations(kind, lagr, inv)
    span = el_sites(kind, lagr, inv)
    cols = tuple(equations)
    sigma_window = 3 if kind is ActionKind.SL2_PROJECTIVE else 1
    right = 0.0
    for n in path.sites():
        window = [
            path.velocity_at(n + j)
            for j in range(sigma_window)
            if n + j <= path.last_site
        ]
        if all(all(vi == 0.0 for vi in v) for v in window):
            continue
        if n not in span:
            raise WindowOutOfRange(
                n, "nonzero sigma outside the Euler-Lagrange range; widen the margin"
            )
        sig = sigma_at(kind, path, n).components
        for col, s in zip(cols, sig):
            right = right + equations[col](n) * s
    return magnitude(left - right)
