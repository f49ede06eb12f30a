"""Command-line front end.

Subcommands: validate, solve, self-check, characterize, virtuals.
All numeric output is exact rational text; identical inputs and flags
produce byte-identical output.  Exit codes: 0 success, 2 invalid input,
3 solver or internal failure, 4 scale cap exceeded.
"""

from __future__ import annotations

import argparse
import json
import sys

from .analysis import characterize, iid_scan, srev_breakdown
from .auction import (
    certificate_document,
    extract_dual,
    extract_mechanism,
    load_certificate,
    profile_key,
    solve_form,
    verify_certificate_document,
    write_certificate,
)
from .errors import (
    AuctionLPError,
    DimensionMismatch,
    DuplicateSupportVector,
    InfeasibleInput,
    LabelMismatch,
    MissingZeroType,
    NegativeValue,
    NonUnitMass,
    NotAgentIndependent,
    NotOptimal,
    NotRegular,
    ScaleLimit,
    ZeroMassNonzeroType,
)
from .lp import CertificateError
from .model import BAYES, DS, NEG_INF, load_instance, rat_str
from .oracles import gen_instance
from .virtual import (
    check_ubvv,
    check_vwm,
    regularize_bayes,
    regularize_ds,
    virtual_values_bayes,
    virtual_values_ds,
)

_VALIDATION = (
    NonUnitMass,
    NegativeValue,
    DuplicateSupportVector,
    ZeroMassNonzeroType,
    MissingZeroType,
    DimensionMismatch,
    LabelMismatch,
    InfeasibleInput,
)
_SOLVER = (NotOptimal, NotRegular, NotAgentIndependent)

_FORMS = {"ds": DS, "bic": BAYES}


def _parse_gen_spec(text: str) -> dict:
    spec: dict = {}
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        if "=" not in part:
            raise DimensionMismatch(f"generator spec entry lacks '=': {part!r}")
        key, raw = part.split("=", 1)
        key = key.strip()
        raw = raw.strip()
        if key in ("iid", "correlated"):
            spec[key] = raw.lower() in ("1", "true", "yes")
        else:
            spec[key] = int(raw)
    return spec


def _load(args) -> "Instance":
    instance = load_instance(
        args.path,
        augment_zero=True if args.augment_zero else None,
        strict=getattr(args, "strict", False),
    )
    if instance.profile_count > args.caps:
        raise ScaleLimit(
            f"{instance.profile_count} profiles exceed the cap {args.caps}"
        )
    return instance


def cmd_validate(args) -> int:
    instance = _load(args)
    sys.stdout.write(instance.to_json())
    return 0


def cmd_solve(args) -> int:
    instance = _load(args)
    form = _FORMS[args.form]
    certificate = solve_form(instance, form)
    extract_mechanism(instance, certificate, form)
    extract_dual(instance, certificate, form)
    if args.certificate:
        document = certificate_document(instance, form, certificate)
        write_certificate(args.certificate, document)
    print(rat_str(certificate.objective))
    return 0


def cmd_self_check(args) -> int:
    instance = _load(args)
    document = load_certificate(args.certificate)
    objective = verify_certificate_document(instance, document)
    print(f"ok {rat_str(objective)}")
    return 0


def _characterize_one(instance) -> None:
    report = characterize(instance)
    print(f"brev {rat_str(report.brev)}")
    print(f"drev {rat_str(report.drev)}")
    print(f"srev {rat_str(report.srev)}")
    print(f"brev=drev {str(report.brev_eq_drev).lower()}")
    print(f"drev=srev {str(report.drev_eq_srev).lower()}")
    print(f"srev=brev {str(report.srev_eq_brev).lower()}")
    print(
        "witness agent-independent" if report.ai_witness is not None else "witness none"
    )
    if report.findings:
        for finding in report.findings:
            print(f"finding {finding}")
    else:
        print("findings none")


def cmd_characterize(args) -> int:
    if args.gen is None:
        instance = _load(args)
        _characterize_one(instance)
        return 0
    spec = _parse_gen_spec(args.gen)
    if args.count == 1 and not spec.get("iid"):
        instance = gen_instance(spec, args.seed, cap=args.caps)
        _characterize_one(instance)
        return 0
    if spec.get("iid") and int(spec.get("n", 2)) >= 3:
        records = iid_scan(spec, args.seed, args.count)
    else:
        records = []
        for index in range(args.count):
            instance = gen_instance(spec, args.seed + index, cap=args.caps)
            report = characterize(instance)
            records.append(
                {
                    "index": index,
                    "seed": args.seed + index,
                    "digest": instance.digest(),
                    "brev": rat_str(report.brev),
                    "drev": rat_str(report.drev),
                    "srev": rat_str(report.srev),
                    "brev_eq_drev": report.brev_eq_drev,
                    "drev_eq_srev": report.drev_eq_srev,
                    "srev_eq_brev": report.srev_eq_brev,
                    "findings": list(report.findings),
                }
            )
    for record in records:
        print(json.dumps(record, sort_keys=True))
    return 0


def _entry_str(entry) -> str:
    return "-inf" if entry is NEG_INF else rat_str(entry)


def cmd_virtuals(args) -> int:
    instance = _load(args)
    form = _FORMS[args.form]
    certificate = solve_form(instance, form)
    mechanism = extract_mechanism(instance, certificate, form)
    dual = extract_dual(instance, certificate, form)
    print(f"form {args.form}")
    print(f"objective {rat_str(certificate.objective)}")
    if form == DS:
        regular = regularize_ds(instance, dual, revenue=certificate.objective)
        table = virtual_values_ds(instance, regular)
        for i in range(instance.n):
            for j in range(instance.m):
                for r, profile in enumerate(instance.profiles()):
                    key = profile_key(profile)
                    print(f"phi:{i}:{j}:{key} {_entry_str(table.values[i][j][r])}")
    else:
        regular = regularize_bayes(instance, dual, revenue=certificate.objective)
        table = virtual_values_bayes(instance, regular)
        for i in range(instance.n):
            for j in range(instance.m):
                seen: set[int] = set()
                for r, profile in enumerate(instance.profiles()):
                    t = profile[i]
                    if t in seen:
                        continue
                    seen.add(t)
                    print(f"phibar:{i}:{j}:{t} {_entry_str(table.values[i][j][r])}")
    vwm = check_vwm(instance, mechanism, table)
    if vwm.ok:
        print(f"vwm ok checked={vwm.checked}")
    else:
        print(f"vwm violations {len(vwm.violations)}")
        for violation in vwm.violations:
            buyer = "-" if violation.buyer is None else str(violation.buyer)
            print(f"vwm {violation.kind} i={buyer} j={violation.item} r={violation.rank}")
    ubvv = check_ubvv(table, instance)
    if ubvv.ok:
        print(f"ubvv ok checked={ubvv.checked}")
    else:
        print(f"ubvv violations {len(ubvv.violations)}")
        for i, j, r in ubvv.violations:
            print(f"ubvv over-value i={i} j={j} r={r}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="auctionlp",
        description="Exact LP solver and verifier for optimal auctions "
        "on finite type spaces.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, path=True):
        if path:
            p.add_argument("path", help="instance JSON file")
        p.add_argument(
            "--augment-zero",
            action="store_true",
            help="add the zero vector at mass 0 where absent",
        )
        p.add_argument(
            "--caps",
            type=int,
            default=256,
            metavar="PROFILES",
            help="profile-count cap (default 256)",
        )

    p = sub.add_parser("validate", help="validate and print the normalized instance")
    common(p)
    p.add_argument("--strict", action="store_true", help="reject zero-mass nonzero types")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("solve", help="solve one form and print the optimal revenue")
    common(p)
    p.add_argument("--form", choices=sorted(_FORMS), default="ds")
    p.add_argument("--certificate", metavar="OUT", help="write a certificate file")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("self-check", help="re-verify a stored certificate")
    common(p)
    p.add_argument("certificate", help="certificate JSON file")
    p.set_defaults(func=cmd_self_check)

    p = sub.add_parser(
        "characterize",
        help="report BRev/DRev/SRev, equality flags, and the witness status",
    )
    common(p, path=False)
    p.add_argument("path", nargs="?", default=None, help="instance JSON file")
    p.add_argument(
        "--gen",
        metavar="SPEC",
        help="generate instances instead: comma-separated key=value "
        "(n, m, support, value_range, denominator, iid, correlated)",
    )
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--count", type=int, default=1)
    p.set_defaults(func=cmd_characterize)

    p = sub.add_parser(
        "virtuals",
        help="solve, regularize, and print the virtual-value table with checks",
    )
    common(p)
    p.add_argument("--form", choices=sorted(_FORMS), default="ds")
    p.set_defaults(func=cmd_virtuals)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "characterize" and args.path is None and args.gen is None:
        parser.error("characterize needs an instance path or --gen")
    try:
        return args.func(args)
    except ScaleLimit as exc:
        print(f"error: ScaleLimit: {exc}", file=sys.stderr)
        return 4
    except _VALIDATION as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except CertificateError as exc:
        # forged or corrupted certificate data: invalid input, not a
        # solver failure
        print(f"error: CertificateError: {exc}", file=sys.stderr)
        return 2
    except _SOLVER as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3
    except AuctionLPError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3
    except (OSError, json.JSONDecodeError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
