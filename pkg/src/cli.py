"""Command-line front end: channels, find, verify, tables, validate, transmit."""

import argparse
import json
import logging
import math
import sys
from typing import Callable, Dict, List, Optional, Sequence, TextIO

import numpy as np

from src.models.channels import ChannelFamily, KrausChannel
from src.models.errors import DimensionError, InvforgeError, VerificationBudgetError
from src.models.invariants import InvariantMonomial
from src.services.catalog_store import load_catalog, monomial_to_record, records_to_monomials, save_catalog
from src.services.channel_zoo import (
    FAMILY_NAMES,
    build_family,
    instantiate,
    list_families,
    load_channel_spec,
    validate_cptp,
)
from src.services.invariant_catalog import (
    ERRATUM_SOURCE,
    catalog_operators,
    paper_catalog,
    reproduce_count_table,
)
from src.services.invariant_search import InvariantSearch, verify_invariance
from src.services.spectral_engine import SpectralEngine
from src.services.transfer_sim import build_codebook, transmission_accuracy, transmit
from src.utils.text_utils import format_lambdas, format_table
from config.settings import settings

logger = logging.getLogger(__name__)


def _param(text: str) -> tuple:
    name, sep, value = text.partition("=")
    if not sep or not name:
        raise argparse.ArgumentTypeError(f"expected key=value, got '{text}'")
    try:
        return name.strip(), float(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"parameter {name} needs a number, got '{value}'")


def _dims(text: str) -> List[int]:
    try:
        dims = [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got '{text}'")
    if not dims:
        raise argparse.ArgumentTypeError("no dimensions given")
    return dims


def _names(text: str) -> List[str]:
    return [part.strip() for part in text.split(",") if part.strip()]


def _shots(text: str) -> float:
    if text.lower() in ("inf", "exact"):
        return math.inf
    try:
        shots = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"shots must be an integer or 'inf', got '{text}'")
    if shots < 1:
        raise argparse.ArgumentTypeError(f"shots must be at least 1, got {shots}")
    return shots


def _positive(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got '{text}'")
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {value}")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="invforge",
        description="Invariants of noisy quantum channels: discovery, verification and transfer demos",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    channels = sub.add_parser("channels", help="list channel families and their parameters")
    channels.add_argument("--dim", type=int, default=3, help="N for families that are not qubit-only")

    def channel_args(p: argparse.ArgumentParser, required: bool = True) -> None:
        p.add_argument("--channel", choices=FAMILY_NAMES, required=required)
        p.add_argument("--dim", type=int, required=required)
        p.add_argument("--seed", type=int, default=settings.INVFORGE_SEED)

    find = sub.add_parser("find", help="discover invariant monomials of a family")
    channel_args(find)
    find.add_argument("--samples", type=_positive, default=settings.DEFAULT_SAMPLES)
    find.add_argument("--max-terms", type=_positive, default=settings.MAX_TERMS)
    find.add_argument("--max-exp", type=_positive, default=settings.MAX_EXPONENT)
    find.add_argument("--json", action="store_true", help="print catalog records as JSON")
    find.add_argument("--save", metavar="PATH", help="write the result as a catalog file")

    verify = sub.add_parser("verify", help="check cataloged invariants on random trials")
    channel_args(verify)
    verify.add_argument("--trials", type=_positive, default=settings.DEFAULT_TRIALS)
    verify.add_argument("--catalog", metavar="PATH", help="verify the monomials of a catalog file instead")

    tables = sub.add_parser("tables", help="reproduce the invariant count table")
    tables.add_argument("--dims", type=_dims, default=[3, 4, 5])
    tables.add_argument("--families", type=_names, default=None)
    tables.add_argument("--no-rank", action="store_true", help="skip the independence rank column")

    validate = sub.add_parser("validate", help="check that a channel is CPTP")
    source = validate.add_mutually_exclusive_group(required=True)
    source.add_argument("--spec", metavar="PATH", help="channel-spec JSON file")
    source.add_argument("--channel", choices=FAMILY_NAMES)
    validate.add_argument("--dim", type=int, default=None)
    validate.add_argument("--param", type=_param, action="append", default=[])
    validate.add_argument("--strict", action="store_true", help="literal transposition weights")

    send = sub.add_parser("transmit", help="send a random message through a noisy channel")
    channel_args(send)
    send.add_argument("--param", type=_param, action="append", default=[])
    send.add_argument("--symbols", type=_positive, default=16)
    send.add_argument("--shots", type=_shots, default=math.inf)
    send.add_argument("--message-len", type=_positive, default=100)
    send.add_argument("--delta", type=float, default=0.5)
    send.add_argument("--json", action="store_true", help="print the transcript as JSON")

    return parser


def _describe_params(family: ChannelFamily) -> str:
    parts = []
    for group, specs in family.simplex_groups().items():
        parts.append(f"{group}{{{','.join(s.name for s in specs)}}} sum=1")
    for spec in family.param_spec:
        if spec.simplex_group is None:
            parts.append(f"{spec.name}[{spec.lower:g},{spec.upper:g}]")
    return "; ".join(parts)


def cmd_channels(args: argparse.Namespace, out: TextIO) -> int:
    rows = [
        (f.name, f.dim, "yes" if f.qubit_only else "no", _describe_params(f))
        for f in list_families(args.dim)
    ]
    print(format_table(["family", "N", "qubit-only", "parameters"], rows, max_width=100), file=out)
    return 0


def _render_lambdas(monomial: InvariantMonomial) -> str:
    return "; ".join(
        f"{term.token}: {format_lambdas(term.lambdas)}"
        for term in monomial.terms if term.lambdas is not None
    )


def cmd_find(args: argparse.Namespace, out: TextIO) -> int:
    family = build_family(args.channel, args.dim)
    extras = catalog_operators(args.channel, args.dim)
    search = InvariantSearch(engine=SpectralEngine(), max_terms=args.max_terms, max_exp=args.max_exp)
    monomials = search.find_invariants(family, samples=args.samples, seed=args.seed, extra_operators=extras)
    records = [monomial_to_record(m, family.name) for m in monomials]

    if args.save:
        save_catalog(args.save, records)
    if args.json:
        print(json.dumps([r.model_dump(mode="json") for r in records], indent=2), file=out)
        return 0

    if not monomials:
        print(f"{family.name} N={family.dim}: no invariant besides the identity", file=out)
        return 0
    rows = [(m.family.value, m.render(), _render_lambdas(m)) for m in monomials]
    print(f"{family.name} N={family.dim}: {len(monomials)} invariants", file=out)
    print(format_table(["class", "invariant", "lambda samples"], rows, max_width=120), file=out)
    return 0


def cmd_verify(args: argparse.Namespace, out: TextIO) -> int:
    family = build_family(args.channel, args.dim)
    if args.catalog:
        items = [(m, "file") for m in records_to_monomials(load_catalog(args.catalog))]
    else:
        items = [(e.monomial, e.source) for e in paper_catalog(args.channel, args.dim, include_errata=True)]
    if not items:
        print(f"{family.name} N={family.dim}: no cataloged invariants", file=out)
        return 0

    rows = []
    failed = False
    for monomial, source in items:
        try:
            report = verify_invariance(monomial, family, trials=args.trials, seed=args.seed)
            deviation, status = f"{report.max_relative_deviation:.3e}", "PASS" if report.passed else "FAIL"
        except VerificationBudgetError as e:
            logger.warning(f"Verification of {monomial} gave up: {e}")
            deviation, status = "undefined", "FAIL"
        if status == "FAIL" and source != ERRATUM_SOURCE:
            failed = True
        rows.append((source, monomial.render(), deviation, status))

    print(f"{family.name} N={family.dim}: {args.trials} trials per invariant", file=out)
    print(format_table(["source", "invariant", "max rel. deviation", "result"], rows), file=out)
    return 1 if failed else 0


def cmd_tables(args: argparse.Namespace, out: TextIO) -> int:
    rows = reproduce_count_table(args.dims, args.families, with_rank=not args.no_rank)
    failed = False
    for row in rows:
        status = "PASS" if row.passed else "FAIL"
        failed = failed or not row.passed
        extra = f"first={row.first} second+third={row.second_third} expected={row.expected}"
        if row.independent is not None:
            extra += f" independent={row.independent}"
        print(f"{row.family} {row.dim} total={row.total} {status}  {extra}", file=out)
    return 1 if failed else 0


def _report_channel(channel: KrausChannel, out: TextIO) -> int:
    report = validate_cptp(channel)
    status = "PASS" if report.passed else "FAIL"
    print(
        f"{channel.name} N={channel.dim}: {status} "
        f"(max deviation {report.max_deviation:.3e}, tolerance {report.tolerance:g})",
        file=out,
    )
    norms = ", ".join(f"{n:.6f}" for n in report.kraus_norms)
    print(f"{len(channel.kraus)} Kraus operators, norms: {norms}", file=out)
    return 0 if report.passed else 1


def cmd_validate(args: argparse.Namespace, out: TextIO) -> int:
    if args.spec:
        return _report_channel(load_channel_spec(args.spec), out)
    if args.dim is None:
        raise DimensionError("--dim is required with --channel")
    family = build_family(args.channel, args.dim, strict=args.strict)
    return _report_channel(instantiate(family, dict(args.param)), out)


def cmd_transmit(args: argparse.Namespace, out: TextIO) -> int:
    family = build_family(args.channel, args.dim)
    rng = np.random.default_rng(args.seed)
    params = dict(args.param) or family.sample(rng, interior=True, margin=settings.REFERENCE_MARGIN)
    codebook = build_codebook(family, args.symbols, args.delta, seed=args.seed)
    message = [int(s) for s in rng.integers(0, args.symbols, size=args.message_len)]
    result = transmit(codebook, message, params, shots=args.shots, seed=args.seed)

    if args.json:
        transcript = [r.model_dump(mode="json", exclude={"distance"}) for r in result.records]
        print(json.dumps(transcript, indent=2), file=out)
        return 0

    erasures = sum(1 for r in result.records if r.erasure_flag)
    shots = "exact" if args.shots == math.inf else str(int(args.shots))
    print(
        f"{family.name} N={family.dim} symbols={args.symbols} shots={shots} "
        f"message-len={args.message_len}",
        file=out,
    )
    print(f"params: {', '.join(f'{k}={v:.6g}' for k, v in sorted(params.items()))}", file=out)
    print(f"invariants: {', '.join(m.render() for m in codebook.invariants)}", file=out)
    print(f"accuracy={transmission_accuracy(result):.4f} erasures={erasures}", file=out)
    return 0


COMMANDS: Dict[str, Callable[[argparse.Namespace, TextIO], int]] = {
    "channels": cmd_channels,
    "find": cmd_find,
    "verify": cmd_verify,
    "tables": cmd_tables,
    "validate": cmd_validate,
    "transmit": cmd_transmit,
}


def run_cli(argv: Sequence[str], out: Optional[TextIO] = None) -> int:
    """Run one subcommand; returns 0 on success, 1 on failure, 2 on usage errors."""
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(list(argv))
    except SystemExit as e:
        return 0 if e.code in (0, None) else 2

    try:
        return COMMANDS[args.command](args, out)
    except InvforgeError as e:
        logger.error(f"Error in {args.command}: {e}")
        print(f"error: {e}", file=sys.stderr)
        return 1


def main(argv: Optional[Sequence[str]] = None) -> int:
    logging.basicConfig(
        level=getattr(logging, settings.LOG_LEVEL),
        format=settings.LOG_FORMAT,
        stream=sys.stderr,
    )
    return run_cli(sys.argv[1:] if argv is None else argv)


if __name__ == "__main__":
    sys.exit(main())
