"""Command-line entry point: ``ldsrlars <command> ...``.

Exit status: 0 on success, 1 when the inputs are rejected or a check fails
(fragment violation, unequal outputs, failed fuzz trials), 2 on usage errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Sequence

from .errors import FragmentViolation, LdsrLarsError, ParseError, ValidationError
from .fragments import LARS_FRAGMENTS, LDSR_FRAGMENTS, classify_lars_fragments, classify_ldsr_fragments
from .harness.campaign import differential_campaign, validate_config
from .harness.generate import DESK, Bounds
from .harness.profiles import LTuple, Profile, Verdict, check_expressibility, profile_output
from .lars.syntax import LarsProgram, format_lars, format_rule, parse_lars, validate_lars
from .ldsr.syntax import format_program, parse_ldsr, validate_program
from .parsing import parse_signature
from .stream import Stream, format_stream, parse_facts, parse_stream, stream_to_obj
from .transpile import STRICT, translate

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


# -- input helpers ------------------------------------------------------------------


def _read(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None


def _guess_lang(path: str, text: str, lang: str | None) -> str:
    if lang:
        return lang
    suffix = Path(path).suffix.lower()
    if suffix in (".ldsr", ".lars"):
        return suffix[1:]
    if "<-" in text or "box(" in text:
        return "lars"
    return "ldsr"


def load_program(path: str, lang: str | None = None, signature: str | None = None):
    text = _read(path)
    lang = _guess_lang(path, text, lang)
    program = parse_lars(text) if lang == "lars" else parse_ldsr(text)
    if signature:
        decls = parse_signature(_read(signature))
        sig = program.signature.with_decls(decls)
        program = type(program)(program.rules, sig)
        (validate_lars if lang == "lars" else validate_program)(program)
    return program


def _load_stream(path: str | None, fallback_n: int | None = None) -> Stream:
    if path is None:
        if fallback_n is None:
            raise UsageError("--stream is required")
        return Stream.empty(fallback_n)
    return parse_stream(_read(path))


def _load_background(path: str | None) -> frozenset:
    return parse_facts(_read(path)) if path else frozenset()


def _print_program(program) -> str:
    return format_lars(program) if isinstance(program, LarsProgram) else format_program(program)


def _program_obj(program) -> dict:
    lang = "lars" if isinstance(program, LarsProgram) else "ldsr"
    return {
        "language": lang,
        "declarations": [{"name": d.name, "kind": d.kind.value, "arity": d.arity} for d in program.signature.decls],
        "rules": [str(r) if lang == "ldsr" else format_rule(r) for r in program.rules],
    }


def _emit(args, text: str, obj) -> None:
    if args.format == "structured":
        print(json.dumps(obj, indent=2, sort_keys=True))
    else:
        sys.stdout.write(text if text.endswith("\n") or not text else text + "\n")


def _verdict_text(v: Verdict, t: int | None = None) -> str:
    where = f"t={t}: " if t is not None else ""
    if v.equal:
        return f"{where}equal" + (" (filtered)" if v.filtered else "")
    i, left, right = v.first_diff
    return (
        f"{where}differ at {i}"
        f"\n  only in source: {' '.join(map(str, left)) or '-'}"
        f"\n  only in target: {' '.join(map(str, right)) or '-'}"
    )


# -- commands -------------------------------------------------------------------------


def cmd_parse(args) -> int:
    program = load_program(args.file, args.lang, args.signature)
    _emit(args, _print_program(program), _program_obj(program))
    return EXIT_OK


def _violation_text(v) -> str:
    detail = ", ".join(f"{k}={v}" for k, v in v.witness.items())
    return f"{v.condition}: {detail}"


def cmd_classify(args) -> int:
    program = load_program(args.file, args.lang, args.signature)
    if isinstance(program, LarsProgram):
        verdict, names = classify_lars_fragments(program), LARS_FRAGMENTS
    else:
        verdict, names = classify_ldsr_fragments(program), LDSR_FRAGMENTS
    lines = []
    for f in names:
        if verdict.member(f):
            lines.append(f"{f}: yes")
        else:
            reasons = "; ".join(_violation_text(v) for v in verdict.violations_for(f))
            lines.append(f"{f}: no ({reasons})")
    _emit(args, "\n".join(lines), verdict.to_obj(names))
    return EXIT_OK


def cmd_translate(args) -> int:
    program = load_program(args.file, args.lang, args.signature)
    out = translate(program, args.rho)
    text = _print_program(out.program)
    if out.aux_predicates:
        text += "% auxiliary: " + " ".join(sorted(out.aux_predicates)) + "\n"
    for o, s, h in out.provenance:
        src = f"source rule {s}" if s is not None else "generated"
        text += f"% rule {o}: {src} via {h}\n"
    obj = {
        "rho": args.rho,
        "program": _program_obj(out.program),
        "auxiliary_predicates": sorted(out.aux_predicates),
        "provenance": out.provenance_obj(),
    }
    _emit(args, text, obj)
    return EXIT_OK


def _tuple(args, program) -> LTuple:
    sigma = _load_stream(args.stream)
    return LTuple(program, sigma, _load_background(args.background))


def cmd_eval(args) -> int:
    program = load_program(args.file, args.lang, args.signature)
    tup = _tuple(args, program)
    t = tup.input.n if args.t is None else args.t
    out = profile_output(tup, t, args.profile)
    obj = {"profile": out.profile.value, "t": out.t, **stream_to_obj(out.stream)}
    _emit(args, format_stream(out.stream), obj)
    return EXIT_OK


def cmd_diff(args) -> int:
    src = load_program(args.source, None, args.signature)
    dst = load_program(args.target, None, args.signature)
    left = _tuple(args, src)
    right = LTuple(dst, left.input, left.background)
    times = range(left.input.n + 1) if args.t is None else [args.t]
    results = [(t, check_expressibility(left, right, t, args.profile, args.strict)) for t in times]
    lines = [_verdict_text(v, t) for t, v in results]
    obj = [{"t": t, **v.to_obj()} for t, v in results]
    _emit(args, "\n".join(lines), obj)
    return EXIT_OK if all(v.equal for _, v in results) else EXIT_FAIL


def cmd_fuzz(args) -> int:
    strict = args.rho in STRICT if args.strict is None else args.strict
    bounds = Bounds(max_n=args.max_n) if args.max_n else DESK
    try:
        validate_config(args.fragment, args.rho, args.profile, strict)
    except ValidationError as exc:
        raise UsageError(str(exc)) from None
    report = differential_campaign(
        args.fragment, args.rho, args.profile, strict, args.trials, bounds, seed=args.seed, workers=args.workers
    )
    lines = [report.summary()]
    for f in report.failures():
        lines.append(f"  seed={f['seed']} t={f['t']} " + (f.get("error") or json.dumps(f.get("diff"))))
    _emit(args, "\n".join(lines), report.records())
    return EXIT_OK if report.ok else EXIT_FAIL


# -- argument parsing -------------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--format", choices=("text", "structured"), default="text")
    common.add_argument("--signature", metavar="FILE", help="shared predicate declarations")

    p = _Parser(prog="ldsrlars", description="LDSR / LARS_D workbench")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def lang_opt(sp):
        sp.add_argument("--lang", choices=("ldsr", "lars"))

    def data_opts(sp):
        sp.add_argument("--stream", metavar="FILE")
        sp.add_argument("--background", metavar="FILE")
        sp.add_argument("--t", type=int)
        sp.add_argument("--profile", choices=[x.value for x in Profile], default="atomic")

    sp = sub.add_parser("parse", parents=[common], help="parse and print canonically")
    lang_opt(sp)
    sp.add_argument("file")
    sp.set_defaults(run=cmd_parse)

    sp = sub.add_parser("classify", parents=[common], help="report fragment membership")
    lang_opt(sp)
    sp.add_argument("file")
    sp.set_defaults(run=cmd_classify)

    sp = sub.add_parser("translate", parents=[common], help="apply one of rho1..rho7")
    lang_opt(sp)
    sp.add_argument("--rho", type=int, choices=range(1, 8), required=True)
    sp.add_argument("file")
    sp.set_defaults(run=cmd_translate)

    sp = sub.add_parser("eval", parents=[common], help="output stream under a profile")
    lang_opt(sp)
    data_opts(sp)
    sp.add_argument("file")
    sp.set_defaults(run=cmd_eval)

    sp = sub.add_parser("diff", parents=[common], help="compare two programs' outputs")
    data_opts(sp)
    sp.add_argument("--strict", action="store_true", help="compare all predicates, not just the source's")
    sp.add_argument("source")
    sp.add_argument("target")
    sp.set_defaults(run=cmd_diff)

    sp = sub.add_parser("fuzz", parents=[common], help="seeded differential campaign")
    sp.add_argument("--fragment", required=True, choices=LARS_FRAGMENTS + LDSR_FRAGMENTS)
    sp.add_argument("--rho", type=int, choices=range(1, 8), required=True)
    sp.add_argument("--profile", choices=[x.value for x in Profile], required=True)
    sp.add_argument("--trials", type=int, default=100)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--max-n", type=int, dest="max_n")
    sp.add_argument("--workers", type=int, default=1)
    strict = sp.add_mutually_exclusive_group()
    strict.add_argument("--strict", action="store_true", default=None)
    strict.add_argument("--filtered", action="store_false", dest="strict")
    sp.set_defaults(run=cmd_fuzz)
    return p


def run(argv: Sequence[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.run(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ParseError as exc:
        print(f"{getattr(args, 'file', None) or 'input'}: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except FragmentViolation as exc:
        print(f"fragment violation: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except LdsrLarsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
