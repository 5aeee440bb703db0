"""JSON document layer of the command-line pipeline.

Four document shapes travel between commands: tagged lattice paths,
polynomial Lagrangians, invariant sequences and reconstruction
constants. Parsing validates shape only and names the offending field
in the error; numbers are emitted through Python's shortest
round-trip float repr, so emit -> parse is the identity on every
document type.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Optional

from .errors import DocumentFormatError, KindMismatch
from .frames import InvariantSequence, LatticePath
from .groups import ActionKind
from .variational import (
    InvariantLagrangian,
    lagrangian_from_callable,
    polynomial_lagrangian,
)


def dumps(obj) -> str:
    """Stable JSON text: sorted keys, shortest round-trip floats."""
    return json.dumps(obj, sort_keys=True)


def _fail(field, message):
    raise DocumentFormatError(f"{field}: {message}")


def _mapping(obj, where):
    if not isinstance(obj, dict):
        _fail(where, f"expected an object, got {type(obj).__name__}")
    return obj


def _array(obj, where):
    if not isinstance(obj, list):
        _fail(where, f"expected an array, got {type(obj).__name__}")
    return obj


def _number(obj, where) -> float:
    if isinstance(obj, bool) or not isinstance(obj, (int, float)):
        _fail(where, f"expected a number, got {type(obj).__name__}")
    return float(obj)


def _integer(obj, where) -> int:
    if isinstance(obj, bool) or not isinstance(obj, int):
        _fail(where, f"expected an integer, got {type(obj).__name__}")
    return int(obj)


def _field(record, name, where=None):
    if name not in record:
        _fail(where or name, "missing required field")
    return record[name]


def _action(obj, where) -> ActionKind:
    if not isinstance(obj, str):
        _fail(where, f"expected an action tag string, got {type(obj).__name__}")
    try:
        return ActionKind.from_tag(obj)
    except KindMismatch:
        _fail(where, f"unknown action tag {obj!r}")


def _reject_unknown(record, allowed, prefix=""):
    for key in record:
        if key not in allowed:
            _fail(f"{prefix}{key}", "unknown field")


def _point_rows(record, name, dim, expected_len=None):
    rows = _array(_field(record, name), name)
    if not rows:
        _fail(name, "need at least one entry")
    if expected_len is not None and len(rows) != expected_len:
        noun = "row" if expected_len == 1 else "rows"
        _fail(name, f"expected {expected_len} {noun} to mirror points, got {len(rows)}")
    out = []
    for i, entry in enumerate(rows):
        row = _array(entry, f"{name}[{i}]")
        if len(row) != dim:
            noun = "coordinate" if dim == 1 else "coordinates"
            _fail(f"{name}[{i}]", f"expected {dim} {noun}, got {len(row)}")
        out.append(
            tuple(_number(c, f"{name}[{i}][{j}]") for j, c in enumerate(row))
        )
    return tuple(out)


@dataclass(frozen=True)
class PathDocument:
    """A lattice path tagged with the action that reads it."""

    kind: ActionKind
    path: LatticePath

    def to_obj(self) -> dict:
        obj = {
            "action": self.kind.value,
            "offset": self.path.offset,
            "points": [[float(c) for c in p] for p in self.path.points],
        }
        if self.path.velocities is not None:
            obj["velocities"] = [
                [float(c) for c in v] for v in self.path.velocities
            ]
        return obj


def parse_path_document(obj) -> PathDocument:
    record = _mapping(obj, "path document")
    _reject_unknown(record, {"action", "offset", "points", "velocities"})
    kind = _action(_field(record, "action"), "action")
    offset = _integer(record.get("offset", 0), "offset")
    points = _point_rows(record, "points", kind.point_dim)
    velocities = None
    if record.get("velocities") is not None:
        velocities = _point_rows(
            record, "velocities", kind.point_dim, expected_len=len(points)
        )
    return PathDocument(kind, LatticePath(offset, points, velocities))


@dataclass(frozen=True)
class LagrangianDocument:
    """Polynomial Lagrangian terms in document-normal form.

    ``terms`` is ((coeff, ((name, shift, power), ...)), ...) with
    positive powers only; a document whose terms read no invariant
    still yields a usable constant density.
    """

    terms: tuple

    def lagrangian(self) -> InvariantLagrangian:
        if any(factors for _, factors in self.terms):
            return polynomial_lagrangian(self.terms, label="document")
        # a constant density still needs one window so site ranges
        # exist; every variation of it vanishes identically
        total = sum((coeff for coeff, _ in self.terms), 0.0)
        return lagrangian_from_callable(
            lambda values, total=total: total, (("kappa", 1),), label="constant"
        )

    def to_obj(self) -> dict:
        out = []
        for coeff, factors in self.terms:
            entry = {"coeff": coeff}
            for name, shift, power in factors:
                entry.setdefault(name, {})[str(shift)] = power
            out.append(entry)
        return {"terms": out}


def _shift_table(table, where):
    pairs = []
    for key, raw in _mapping(table, where).items():
        label = f"{where}[{key!r}]"
        try:
            shift = int(key)
        except (TypeError, ValueError):
            _fail(label, "shift keys must be nonnegative integers")
        if shift < 0:
            _fail(label, "shift keys must be nonnegative integers")
        power = _integer(raw, label)
        if power < 0:
            _fail(label, "exponents must be nonnegative integers")
        if power:
            pairs.append((shift, power))
    return sorted(pairs)


def parse_lagrangian_document(obj, kind=None) -> LagrangianDocument:
    record = _mapping(obj, "lagrangian document")
    _reject_unknown(record, {"terms"})
    entries = _array(_field(record, "terms"), "terms")
    terms = []
    for i, entry in enumerate(entries):
        term = _mapping(entry, f"terms[{i}]")
        _reject_unknown(term, {"coeff", "kappa", "tau"}, prefix=f"terms[{i}].")
        coeff = _number(_field(term, "coeff", f"terms[{i}].coeff"), f"terms[{i}].coeff")
        factors = []
        for name in ("kappa", "tau"):
            if name not in term:
                continue
            for shift, power in _shift_table(term[name], f"terms[{i}].{name}"):
                factors.append((name, shift, power))
        if (
            kind is not None
            and ActionKind(kind) is ActionKind.SL2_PROJECTIVE
            and any(name == "tau" for name, _, _ in factors)
        ):
            _fail(f"terms[{i}].tau", "the projective action has no tau invariant")
        terms.append((coeff, tuple(sorted(factors))))
    return LagrangianDocument(tuple(terms))


@dataclass(frozen=True)
class InvariantsDocument:
    """Offset-aligned generating invariant arrays tagged with the action."""

    kind: ActionKind
    invariants: InvariantSequence

    def to_obj(self) -> dict:
        obj = {
            "action": self.kind.value,
            "offset": self.invariants.offset,
            "kappa": [float(v) for v in self.invariants.kappa],
        }
        if self.invariants.tau is not None:
            obj["tau"] = [float(v) for v in self.invariants.tau]
        return obj


def _value_row(record, name):
    row = _array(_field(record, name), name)
    if not row:
        _fail(name, "need at least one value")
    return tuple(_number(v, f"{name}[{i}]") for i, v in enumerate(row))


def parse_invariants_document(obj) -> InvariantsDocument:
    record = _mapping(obj, "invariants document")
    _reject_unknown(record, {"action", "offset", "kappa", "tau"})
    kind = _action(_field(record, "action"), "action")
    offset = _integer(record.get("offset", 0), "offset")
    kappa = _value_row(record, "kappa")
    if kind is ActionKind.SL2_PROJECTIVE:
        if record.get("tau") is not None:
            _fail("tau", "the projective action has no tau invariant")
        tau = None
    else:
        tau = _value_row(record, "tau")
    return InvariantsDocument(kind, InvariantSequence(offset, kappa, tau))


@dataclass(frozen=True)
class ConstantsDocument:
    """Conservation-law data feeding the closed-form reconstruction.

    ``constant`` is the conserved row k, ``seed`` the integration
    constants (frame row (c, d) for the SL(2)-type actions, the single
    scalar c for the equi-affine one). Conserved vectors come either
    from an explicit per-site table starting at ``start`` or from a
    Lagrangian evaluated on the invariant data.
    """

    constant: tuple
    seed: tuple
    lagrangian: Optional[LagrangianDocument] = None
    vectors: Optional[tuple] = None
    start: Optional[int] = None

    def to_obj(self) -> dict:
        obj = {
            "k": [float(v) for v in self.constant],
            "seed": [float(v) for v in self.seed],
        }
        if self.lagrangian is not None:
            obj["lagrangian"] = self.lagrangian.to_obj()
        if self.vectors is not None:
            obj["vectors"] = [[float(c) for c in v] for v in self.vectors]
            obj["start"] = self.start
        return obj


def parse_constants_document(obj, kind) -> ConstantsDocument:
    kind = ActionKind(kind)
    record = _mapping(obj, "constants document")
    _reject_unknown(record, {"k", "seed", "lagrangian", "vectors", "start"})
    constant = _value_row(record, "k")
    if len(constant) != kind.group_dim:
        _fail("k", f"expected {kind.group_dim} components for {kind.value}, got {len(constant)}")
    seed = _value_row(record, "seed")
    seed_len = 1 if kind is ActionKind.SA2 else 2
    if len(seed) != seed_len:
        noun = "constant" if seed_len == 1 else "constants"
        _fail("seed", f"expected {seed_len} integration {noun} for {kind.value}, got {len(seed)}")
    has_lagr = record.get("lagrangian") is not None
    has_vectors = record.get("vectors") is not None
    if has_lagr == has_vectors:
        _fail("constants document", "exactly one of lagrangian and vectors must be given")
    if has_lagr:
        if "start" in record:
            _fail("start", "start only applies to explicit vectors")
        lagr = parse_lagrangian_document(record["lagrangian"], kind)
        return ConstantsDocument(constant, seed, lagrangian=lagr)
    vectors = _point_rows(record, "vectors", kind.group_dim)
    start = _integer(_field(record, "start"), "start")
    return ConstantsDocument(constant, seed, vectors=vectors, start=start)
