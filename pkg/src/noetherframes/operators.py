"""Linear difference operators, adjoints and summation by parts.

An operator here is a finite sum H = sum_j c_j S_j of coefficient
weighted shifts acting on site sequences, (H F)(n) = sum_j c_j(n) F(n+j).
Coefficients are callables of the site, so operators built over an
invariant sequence evaluate exactly under dual-number lifts as well.

The formal adjoint is (H* F)(n) = sum_j c_j(n-j) F(n-j), and for a
forward operator (all shifts nonnegative) the pointwise defect
telescopes,

    F . H(G) - H*(F) . G = (S - id) A_H(F, G),

with the boundary form A_H returned by boundary_form. build_syzygy
produces, for each action, the operator matrix H that intertwines the
time derivative of the invariants with the invariantized velocities,
d(invariants)/dt = H sigma; syzygy_residual and curvature_consistency
check that relation and the matching curvature identity
dK_k/dt = N_{k+1} K_k - K_k N_k numerically on a path with velocities.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import config
from .errors import (
    DegenerateInvariants,
    DimensionMismatch,
    KindMismatch,
    SupportViolation,
)
from .frames import (
    InvariantSequence,
    LatticePath,
    curvature_matrix,
    invariants_of,
    lifted_path,
    maurer_cartan,
    sigma_at,
)
from .groups import ActionKind
from .numeric import Dual, magnitude


@dataclass(frozen=True)
class LinearDifferenceOperator:
    """Finite sum of coefficient-weighted shifts, terms of (shift, coefficient)."""

    terms: tuple

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))
        shifts = [j for j, _ in self.terms]
        if any(not isinstance(j, int) for j in shifts):
            raise DimensionMismatch("shifts must be integers")
        if len(set(shifts)) != len(shifts):
            raise DimensionMismatch("one coefficient per shift")

    @property
    def shifts(self) -> tuple:
        return tuple(sorted(j for j, _ in self.terms))

    def is_forward(self) -> bool:
        return all(j >= 0 for j, _ in self.terms)

    def apply(self, seq, site: int):
        total = 0.0
        for j, c in self.terms:
            total = total + c(site) * seq(site + j)
        return total

    def applied(self, seq):
        return lambda site: self.apply(seq, site)


def adjoint_of(op: LinearDifferenceOperator) -> LinearDifferenceOperator:
    """Formal adjoint, sum_j (S_{-j} c_j) S_{-j}."""
    terms = tuple(
        (-j, lambda site, c=c, j=j: c(site - j)) for j, c in op.terms
    )
    return LinearDifferenceOperator(terms)


def boundary_form(op: LinearDifferenceOperator, left, right, site=None):
    """Boundary form A_H(F, G) with F.H(G) - H*(F).G = (S - id) A_H(F, G).

    A_H(F, G)(n) = sum_{k>=1} sum_{j=0}^{k-1} c_k(n+j-k) F(n+j-k) G(n+j).
    Returns the sequence, or its value when ``site`` is given. Only
    forward operators telescope this way; negative shifts raise
    SupportViolation.
    """
    if not op.is_forward():
        raise SupportViolation("boundary form needs a forward operator")

    def body(n):
        total = 0.0
        for k, c in op.terms:
            for j in range(k):
                m = n + j - k
                total = total + c(m) * left(m) * right(n + j)
        return total

    return body if site is None else body(site)


def pairing_defect(op: LinearDifferenceOperator, left, right, site: int):
    """Defect of the summation-by-parts identity at one site.

    F(n) H(G)(n) - H*(F)(n) G(n) - (A_H(n+1) - A_H(n)); identically
    zero, so any nonzero value measures rounding alone.
    """
    form = boundary_form(op, left, right)
    direct = left(site) * op.apply(right, site)
    adjoint = adjoint_of(op).apply(left, site) * right(site)
    return direct - adjoint - (form(site + 1) - form(site))


@dataclass(frozen=True)
class OperatorMatrix:
    """Matrix of difference operators with named rows and columns."""

    rows: tuple
    row_labels: tuple
    col_labels: tuple

    def __post_init__(self):
        rows = tuple(tuple(row) for row in self.rows)
        object.__setattr__(self, "rows", rows)
        if len(rows) != len(self.row_labels):
            raise DimensionMismatch("one label per row")
        if any(len(row) != len(self.col_labels) for row in rows):
            raise DimensionMismatch("one label per column")

    def entry(self, row_label: str, col_label: str) -> LinearDifferenceOperator:
        i = self.row_labels.index(row_label)
        j = self.col_labels.index(col_label)
        return self.rows[i][j]

    def apply(self, seqs, site: int) -> tuple:
        """Row-wise images of one sequence per column."""
        if len(seqs) != len(self.col_labels):
            raise DimensionMismatch("one sequence per column")
        out = []
        for row in self.rows:
            total = 0.0
            for op, seq in zip(row, seqs):
                total = total + op.apply(seq, site)
            out.append(total)
        return tuple(out)


def _div(num, den, site, what):
    if magnitude(den) <= config.epsilon():
        raise DegenerateInvariants(site, f"{what} vanishes in a syzygy coefficient")
    return num / den


def projective_syzygy_coefficients(inv: InvariantSequence) -> dict:
    """Named coefficients of the scalar projective syzygy operator.

    H = alpha S_3 + beta S_2 + gamma S + delta, each a callable of the
    site, built from the cross-ratio invariant and its shifts.
    """
    ka = inv.kappa_at

    def alpha(n):
        return _div(
            ka(n) * (ka(n) - 1.0) * ka(n + 1) * (ka(n + 2) - 1.0),
            ka(n + 2) * (ka(n + 1) - 1.0),
            n,
            "kappa_2 (kappa_1 - 1)",
        )

    def beta(n):
        return _div(ka(n) * (ka(n + 1) - 1.0), ka(n + 1), n, "kappa_1")

    def gamma(n):
        return -(ka(n) - 1.0)

    def delta(n):
        return -ka(n) * (ka(n) - 1.0)

    return {"alpha": alpha, "beta": beta, "gamma": gamma, "delta": delta}


def build_syzygy(
    kind: ActionKind,
    inv: InvariantSequence,
    literal_affine_coefficient: bool = False,
) -> OperatorMatrix:
    """Syzygy operator H of an action, d(invariants)/dt = H sigma.

    Rows follow kind.invariant_names; columns follow the sigma
    components of the action. ``literal_affine_coefficient`` switches
    the affine shift-1 coefficient of the tau row, sigma^x column, to
    the uncorrected variant 1 + (kappa/kappa_1)(1 + tau), which fails
    the syzygy and is kept only for comparison; the corrected value
    (1 + tau) - kappa/kappa_1 follows from dK_k/dt = N_{k+1} K_k - K_k N_k.
    """
    ka = inv.kappa_at
    if kind is ActionKind.SL2_LINEAR:
        ta = inv.tau_at
        h11 = LinearDifferenceOperator(((0, ka), (1, lambda n: -ka(n))))
        h12 = LinearDifferenceOperator(
            (
                (0, lambda n: _div(1.0, ta(n), n, "tau")),
                (2, lambda n: -_div(ta(n), ta(n + 1) ** 2, n, "tau_1")),
            )
        )
        h21 = LinearDifferenceOperator(((0, ta), (1, ta)))
        h22 = LinearDifferenceOperator(((1, ka),))
        return OperatorMatrix(
            ((h11, h12), (h21, h22)), ("kappa", "tau"), ("sigma_x", "sigma_y")
        )
    if kind is ActionKind.SA2:
        ta = inv.tau_at

        def tau_row_shift1(n):
            if literal_affine_coefficient:
                return 1.0 + _div(ka(n), ka(n + 1), n, "kappa_1") * (1.0 + ta(n))
            return (1.0 + ta(n)) - _div(ka(n), ka(n + 1), n, "kappa_1")

        h11 = LinearDifferenceOperator(
            (
                (0, lambda n: -ta(n)),
                (1, tau_row_shift1),
                (2, ta),
                (3, lambda n: -_div(ka(n), ka(n + 1) ** 2, n, "kappa_1")
                    * (ka(n + 2) * (1.0 + ta(n + 1)) - ka(n + 1))),
            )
        )
        h12 = LinearDifferenceOperator(
            (
                (0, lambda n: -_div(1.0 + ta(n), ka(n), n, "kappa")),
                (2, lambda n: _div(ta(n) * (1.0 + ta(n + 1)), ka(n + 1), n, "kappa_1")),
                (3, lambda n: -_div(ka(n), ka(n + 1) ** 2 * ka(n + 2), n, "kappa_1 kappa_2")
                    * (ka(n + 2) * ta(n + 2) * (1.0 + ta(n + 1))
                       - ka(n + 1) * (1.0 + ta(n + 2)))),
            )
        )
        h21 = LinearDifferenceOperator(
            (
                (0, lambda n: -ka(n)),
                (1, lambda n: -ka(n)),
                (2, lambda n: ta(n) * ka(n + 1) - ka(n)),
            )
        )
        h22 = LinearDifferenceOperator(
            (
                (0, lambda n: -1.0),
                (1, lambda n: -(1.0 + ta(n))),
                (2, lambda n: ta(n) * ta(n + 1)
                    - _div(ka(n) * (1.0 + ta(n + 1)), ka(n + 1), n, "kappa_1")),
            )
        )
        return OperatorMatrix(
            ((h11, h12), (h21, h22)), ("tau", "kappa"), ("sigma_x", "sigma_y")
        )
    co = projective_syzygy_coefficients(inv)
    h = LinearDifferenceOperator(
        ((0, co["delta"]), (1, co["gamma"]), (2, co["beta"]), (3, co["alpha"]))
    )
    return OperatorMatrix(((h,),), ("kappa",), ("sigma_0",))


# trailing sites lost to the widest sigma shift plus the frame window
_SYZYGY_TAIL = {
    ActionKind.SL2_LINEAR: 3,
    ActionKind.SA2: 5,
    ActionKind.SL2_PROJECTIVE: 5,
}

_CURVATURE_TAIL = {
    ActionKind.SL2_LINEAR: 3,
    ActionKind.SA2: 5,
    ActionKind.SL2_PROJECTIVE: 3,
}


def syzygy_sites(kind: ActionKind, path: LatticePath) -> range:
    """Sites where every term of the syzygy residual is available."""
    return range(path.first_site, path.last_site - _SYZYGY_TAIL[kind] + 1)


def curvature_sites(kind: ActionKind, path: LatticePath) -> range:
    """Sites where every term of the curvature residual is available."""
    return range(path.first_site, path.last_site - _CURVATURE_TAIL[kind] + 1)


def _sigma_sequences(kind: ActionKind, path: LatticePath, count: int):
    cache = {}

    def component(idx):
        def seq(site):
            if site not in cache:
                cache[site] = sigma_at(kind, path, site).components
            return cache[site][idx]

        return seq

    return tuple(component(i) for i in range(count))


@dataclass(frozen=True)
class ResidualReport:
    """Per-site residuals of a pointwise identity along a path."""

    sites: tuple
    residuals: tuple

    def max_residual(self) -> float:
        return max(self.residuals, default=0.0)


def invariant_rates(
    kind: ActionKind, path: LatticePath, finite_difference_step: float = None
):
    """d(invariants)/dt along the velocity field, site -> tuple per invariant.

    Dual numbers give the exact derivative; a central finite difference
    of the stated step is available as an independent cross-check.
    """
    if path.velocities is None:
        raise KindMismatch("invariant rates need a path with velocities")
    names = ActionKind(kind).invariant_names
    if finite_difference_step is None:
        lifted = invariants_of(kind, lifted_path(path))
        return lambda n: tuple(lifted.value_at(name, n).tangent for name in names)
    h = finite_difference_step

    def displaced(sign):
        points = tuple(
            tuple(x + sign * 0.5 * h * vx for x, vx in zip(p, v))
            for p, v in zip(path.points, path.velocities)
        )
        return invariants_of(kind, LatticePath(path.offset, points))

    plus, minus = displaced(1.0), displaced(-1.0)
    return lambda n: tuple(
        (plus.value_at(name, n) - minus.value_at(name, n)) / h for name in names
    )


def syzygy_residual_at(
    kind: ActionKind, path: LatticePath, site: int, **options
) -> tuple:
    """Residual of d(invariants)/dt = H sigma at one site, one per invariant."""
    report = _syzygy_sweep(kind, path, (site,), **options)
    return report[0]


def syzygy_residual(kind: ActionKind, path: LatticePath, **options) -> ResidualReport:
    """Residual of d(invariants)/dt = H sigma on a path with velocities.

    The derivative side comes from a dual-number lift of the path (or a
    finite difference when ``finite_difference_step`` is given); the
    operator side evaluates H built over the primal invariants on the
    invariantized velocities. Residuals are per site, maximized over
    the invariant rows.
    """
    sites = tuple(syzygy_sites(kind, path))
    if not sites:
        raise DimensionMismatch("path too short for any syzygy window")
    rows = _syzygy_sweep(kind, path, sites, **options)
    return ResidualReport(sites, tuple(max(row) for row in rows))


def _syzygy_sweep(
    kind: ActionKind,
    path: LatticePath,
    sites,
    finite_difference_step: float = None,
    literal_affine_coefficient: bool = False,
):
    if path.velocities is None:
        raise KindMismatch("syzygy residual needs a path with velocities")
    rates = invariant_rates(kind, path, finite_difference_step)
    h = build_syzygy(kind, invariants_of(kind, path), literal_affine_coefficient)
    seqs = _sigma_sequences(kind, path, len(h.col_labels))
    rows = []
    for n in sites:
        image = h.apply(seqs, n)
        rows.append(
            tuple(magnitude(d - im) for d, im in zip(rates(n), image))
        )
    return rows


def curvature_consistency(
    kind: ActionKind,
    path: LatticePath,
    literal_projective_entry: bool = False,
) -> ResidualReport:
    """Residual of dK_k/dt = N_{k+1} K_k - K_k N_k along a path."""
    if path.velocities is None:
        raise KindMismatch("curvature residual needs a path with velocities")
    lifted = invariants_of(kind, lifted_path(path))
    sites = tuple(curvature_sites(kind, path))
    if not sites:
        raise DimensionMismatch("path too short for any curvature window")
    residuals = []
    for n in sites:
        k_dual = maurer_cartan(kind, lifted, n)
        k_dot = k_dual.map_entries(
            lambda e: e.tangent if isinstance(e, Dual) else 0.0
        )
        k_mat = k_dual.map_entries(
            lambda e: e.primal if isinstance(e, Dual) else e
        )
        n0 = curvature_matrix(kind, path, n, literal_projective_entry)
        n1 = curvature_matrix(kind, path, n + 1, literal_projective_entry)
        residuals.append((n1 @ k_mat - k_mat @ n0 - k_dot).max_abs())
    return ResidualReport(sites, tuple(residuals))
