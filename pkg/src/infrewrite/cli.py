"""Command-line front end.

Exit codes: 0 affirmative, 1 negative, 2 usage, parse or precondition error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .certificate import (
    CertificateFormatError,
    InvalidCertificate,
    Mode,
    check_certificate,
    dump_certificate,
    parse_certificate,
)
from .compression import CompressionError, compress_prefix
from .fixpoint import FixpointError, extract_certificate, gfp_relation, lfp_ired, parse_universe
from .terms import TermError, bisimilar, parse_position, parse_term
from .trs import StepError, TRS, is_normal_form, parse_trs, step_at


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _read(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise _UsageError(f"cannot read {path}: {exc.strerror}") from None


def _vars(args) -> list:
    return [v for chunk in args.vars for v in chunk.replace(",", " ").split()]


def _trs(args) -> TRS:
    return parse_trs(_read(args.trs))


def _cmd_bisim(args, out):
    names = _vars(args)
    s = parse_term(_read(args.a), vars=names)
    t = parse_term(_read(args.b), vars=names)
    same = bisimilar(s, t)
    out.append("bisimilar" if same else "not bisimilar")
    return 0 if same else 1


def _cmd_step(args, out):
    trs = _trs(args)
    t = trs.parse(args.term, _vars(args))
    out.append(str(step_at(t, parse_position(args.pos), trs, args.rule)))
    return 0


def _cmd_nf(args, out):
    trs = _trs(args)
    t = trs.parse(args.term, _vars(args))
    if is_normal_form(t, trs):
        out.append("normal form")
        return 0
    out.append("reducible")
    return 1


def _cmd_check(args, out):
    trs = _trs(args)
    cert = parse_certificate(_read(args.cert), trs, _vars(args))
    verdict = check_certificate(cert, trs)
    out.append(str(verdict))
    return 0 if verdict else 1


def _cmd_fixpoint(args, out):
    trs = _trs(args)
    universe = parse_universe(_read(args.universe), trs, _vars(args))
    mode = Mode(args.relation)
    rel = lfp_ired(universe, trs) if mode is Mode.IRED else gfp_relation(universe, trs, mode)
    text = rel.to_text()
    if text:
        out.append(text.rstrip("\n"))
    return 0


def _cmd_extract(args, out):
    trs = _trs(args)
    names = _vars(args)
    universe = parse_universe(_read(args.universe), trs, names)
    s = trs.parse(args.source, names)
    t = trs.parse(args.target, names)
    for term in (s, t):
        if term not in universe:
            raise _UsageError(f"{term} is not in the universe")
    try:
        cert = extract_certificate(universe, trs, s, t)
    except KeyError:
        out.append("absent")
        return 1
    out.append(dump_certificate(cert).rstrip("\n"))
    return 0


def _cmd_compress(args, out):
    trs = _trs(args)
    cert = parse_certificate(_read(args.cert), trs, _vars(args))
    if args.depth < 0:
        raise _UsageError("--depth must be non-negative")
    prefix = compress_prefix(cert, trs, args.depth)
    out.append(prefix.to_text().rstrip("\n"))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="infrewrite", description="Infinitary rewriting over rational terms.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def command(name, func, help_text):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--vars", action="append", default=[], metavar="NAMES",
                       help="declare variables (comma or space separated)")
        p.set_defaults(func=func)
        return p

    p = command("bisim", _cmd_bisim, "compare two term files")
    p.add_argument("a")
    p.add_argument("b")

    p = command("step", _cmd_step, "rewrite at a position")
    p.add_argument("--trs", required=True)
    p.add_argument("--term", required=True)
    p.add_argument("--pos", required=True, help="dotted position, empty or 'e' for the root")
    p.add_argument("--rule", required=True, type=int)

    p = command("nf", _cmd_nf, "test for normal form")
    p.add_argument("--trs", required=True)
    p.add_argument("--term", required=True)

    p = command("check", _cmd_check, "check a certificate")
    p.add_argument("cert")
    p.add_argument("--trs", required=True)

    p = command("fixpoint", _cmd_fixpoint, "compute a relation over a universe")
    p.add_argument("--trs", required=True)
    p.add_argument("--universe", required=True)
    p.add_argument("--relation", required=True, choices=[m.value for m in Mode])

    p = command("extract", _cmd_extract, "extract an ired certificate")
    p.add_argument("--trs", required=True)
    p.add_argument("--universe", required=True)
    p.add_argument("--from", dest="source", required=True)
    p.add_argument("--to", dest="target", required=True)

    p = command("compress", _cmd_compress, "finite reduction up to a depth")
    p.add_argument("cert")
    p.add_argument("--trs", required=True)
    p.add_argument("--depth", required=True, type=int)
    return parser


_EXPECTED = (
    TermError,
    StepError,
    CertificateFormatError,
    InvalidCertificate,
    CompressionError,
    FixpointError,
)


def run(argv) -> tuple:
    """Run one command; returns ``(exit_code, stdout_text, stderr_text)``."""
    out: list = []
    try:
        args = build_parser().parse_args(argv)
        code = args.func(args, out)
    except _UsageError as exc:
        return 2, "", f"infrewrite: {exc}\n"
    except _EXPECTED as exc:
        message = " ".join(str(exc).split())
        return 2, "", f"infrewrite: {type(exc).__name__}: {message}\n"
    text = "".join(line + "\n" for line in out)
    return code, text, ""


def main(argv=None) -> int:
    code, text, err = run(sys.argv[1:] if argv is None else argv)
    sys.stdout.write(text)
    sys.stderr.write(err)
    return code


if __name__ == "__main__":
    sys.exit(main())
