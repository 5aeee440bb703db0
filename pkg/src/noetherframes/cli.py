"""Command-line front end over the JSON document layer.

Four subcommands drive the pipeline: ``invariants`` turns a path
document into its generating invariants, ``check`` evaluates the
Euler-Lagrange residual and the conservation law of a Lagrangian
along a path, ``reconstruct`` rebuilds a path from solved invariants
and conservation data, and ``verify`` runs the randomized property
suite for one action.

Exit codes: 0 success, 1 malformed input, 2 degenerate data, 3 a
failed check or property suite, 4 a violated reconstruction
hypothesis. The NOETHER_EPS environment variable overrides the global
degeneracy threshold before any command runs.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import config
from .documents import (
    InvariantsDocument,
    PathDocument,
    dumps,
    parse_constants_document,
    parse_invariants_document,
    parse_lagrangian_document,
    parse_path_document,
)
from .conservation import noether_constant
from .errors import (
    BranchPoint,
    DegenerateConstants,
    DimensionMismatch,
    DocumentFormatError,
    KindMismatch,
    NearZeroDivision,
    NonConvergence,
    ProjectivePole,
    SingularMatrix,
    SiteError,
)
from .frames import invariants_of
from .groups import ActionKind
from .numeric import magnitude
from .reconstruct import (
    ReconstructionData,
    reconstruct_path,
    reconstruction_data_from_invariants,
)
from .variational import el_residual
from .verify import run_property_suite

_CHECK_TOLERANCE = 1e-8

_PARSE_FAILURES = (DocumentFormatError, json.JSONDecodeError)

_DEGENERATE = (
    SiteError,
    ProjectivePole,
    NearZeroDivision,
    BranchPoint,
    SingularMatrix,
    DimensionMismatch,
    NonConvergence,
)


def _load(path):
    try:
        with open(path, "r", encoding="utf-8") as handle:
            text = handle.read()
    except OSError as err:
        raise DocumentFormatError(f"{path}: {err.strerror or err}")
    try:
        return json.loads(text)
    except json.JSONDecodeError as err:
        raise DocumentFormatError(
            f"{path}:{err.lineno}:{err.colno}: {err.msg}"
        )


def _action_tag(tag):
    try:
        return ActionKind.from_tag(tag)
    except KindMismatch as err:
        raise DocumentFormatError(f"action: {err}")


def _cmd_invariants(args):
    doc = parse_path_document(_load(args.path))
    inv = invariants_of(doc.kind, doc.path)
    print(dumps(InvariantsDocument(doc.kind, inv).to_obj()))
    return 0


def _cmd_check(args):
    doc = parse_path_document(_load(args.path))
    lagr = parse_lagrangian_document(_load(args.lagrangian), doc.kind).lagrangian()
    report = el_residual(doc.kind, lagr, invariants_of(doc.kind, doc.path))
    record = noether_constant(doc.kind, lagr, doc.path)
    result = {
        "el_residual_max": max(report.residuals),
        "noether_k": [float(v) for v in record.constant],
        "drift": record.drift,
        "first_integral": record.first_integral(doc.kind),
    }
    print(dumps(result))
    passed = (
        result["el_residual_max"] < _CHECK_TOLERANCE
        and result["drift"] < _CHECK_TOLERANCE
    )
    return 0 if passed else 3


def _check_quadratic_hypothesis(kind, constant):
    # the eigenbasis recurrence needs k3 and k1^2 + 4 k2 k3 nonzero;
    # refusing up front names the violated hypothesis in one breath
    if kind is ActionKind.SA2:
        return
    k1, k2, k3 = constant
    if magnitude(k3 * (k1 * k1 + 4.0 * k2 * k3)) <= config.epsilon():
        raise DegenerateConstants("k3*(k1^2+4k2k3) must be nonzero")


def _cmd_reconstruct(args):
    kind = _action_tag(args.action)
    inv_doc = parse_invariants_document(_load(args.invariants))
    if inv_doc.kind is not kind:
        raise DocumentFormatError(
            f"action: invariants document is tagged {inv_doc.kind.value}, "
            f"expected {kind.value}"
        )
    constants = parse_constants_document(_load(args.constants), kind)
    _check_quadratic_hypothesis(kind, constants.constant)
    if constants.lagrangian is not None:
        data = reconstruction_data_from_invariants(
            kind,
            constants.lagrangian.lagrangian(),
            inv_doc.invariants,
            constants.constant,
        )
    else:
        data = ReconstructionData(
            kind=kind,
            invariants=inv_doc.invariants,
            constant=constants.constant,
            start=constants.start,
            vectors=constants.vectors,
        )
    seed = constants.seed[0] if kind is ActionKind.SA2 else tuple(constants.seed)
    path = reconstruct_path(data, seed, length=args.length)
    print(dumps(PathDocument(kind, path).to_obj()))
    return 0


def _cmd_verify(args):
    kind = _action_tag(args.action)
    report = run_property_suite(kind, args.trials, args.seed)
    print(report.text())
    return 0 if report.all_passed else 3


def _nonnegative(text):
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError("must be nonnegative")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="noetherframes",
        description="difference invariants, conservation laws and path reconstruction",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    invariants = commands.add_parser(
        "invariants", help="generating invariants of a path document"
    )
    invariants.add_argument("--path", required=True, help="path document (JSON)")
    invariants.set_defaults(handler=_cmd_invariants)

    check = commands.add_parser(
        "check", help="Euler-Lagrange residual and conservation law along a path"
    )
    check.add_argument("--path", required=True, help="path document (JSON)")
    check.add_argument(
        "--lagrangian", required=True, help="Lagrangian document (JSON)"
    )
    check.set_defaults(handler=_cmd_check)

    reconstruct = commands.add_parser(
        "reconstruct", help="rebuild a path from invariants and conservation data"
    )
    reconstruct.add_argument("--action", required=True, help="action tag")
    reconstruct.add_argument(
        "--invariants", required=True, help="invariants document (JSON)"
    )
    reconstruct.add_argument(
        "--constants", required=True, help="constants document (JSON)"
    )
    reconstruct.add_argument(
        "--length", type=int, default=None, help="number of points to rebuild"
    )
    reconstruct.set_defaults(handler=_cmd_reconstruct)

    verify = commands.add_parser(
        "verify", help="run the randomized property suite for one action"
    )
    verify.add_argument("--action", required=True, help="action tag")
    verify.add_argument(
        "--trials", type=_nonnegative, required=True, help="trials per property"
    )
    verify.add_argument("--seed", type=int, default=0, help="suite seed")
    verify.set_defaults(handler=_cmd_verify)
    return parser


def main(argv=None) -> int:
    override = os.environ.get("NOETHER_EPS")
    if override is not None:
        try:
            config.set_epsilon(float(override))
        except ValueError:
            print(f"error: NOETHER_EPS: invalid epsilon {override!r}", file=sys.stderr)
            return 1
    args = build_parser().parse_args(argv)
    try:
        return args.handler(args)
    except _PARSE_FAILURES as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    except DegenerateConstants as err:
        print(f"error: {err}", file=sys.stderr)
        return 4
    except _DEGENERATE as err:
        print(f"error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
