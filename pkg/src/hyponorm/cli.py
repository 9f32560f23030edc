"""``hyponorm`` command-line front end.

Exit codes: 0 success, 1 a checked inequality was violated, 2 bad flags or
arguments, 3 file errors, 4 the requested method does not apply.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from typing import Sequence

from . import __version__
from .bounds import DEFAULT_EXPONENTS, SUITE_GROUPS, run_full_suite
from .engine import METHOD_CHOICES, MethodMismatchError, OptimizerConfig, certify, hypo_norm
from .fuzz import (
    dump_lemma_failure,
    dump_suite_failures,
    fuzz_lemma,
    fuzz_suite,
    suite_summary,
)
from .instances import SUFFIX, Corpus, CorpusError, parse_genspec
from .lemmas import GRUSS_VARIANTS, LEMMA_IDS, PreconditionViolated, run_lemma
from .linalg import ExponentError, format_exponent, parse_exponent

EXIT_OK, EXIT_VIOLATION, EXIT_USAGE, EXIT_FILE, EXIT_METHOD = 0, 1, 2, 3, 4


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# output
# ---------------------------------------------------------------------------


def _clean(obj):
    """JSON-safe copy: non-finite floats become the strings inf, -inf, nan."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, float) and not math.isfinite(obj):
        return "nan" if math.isnan(obj) else ("inf" if obj > 0 else "-inf")
    return obj


class Printer:
    def __init__(self, fmt: str, stream=None):
        self.fmt = fmt
        self.stream = stream or sys.stdout

    def emit(self, record: dict, human: str | None = None) -> None:
        if self.fmt == "jsonl":
            self.stream.write(json.dumps(_clean(record), separators=(",", ":")) + "\n")
        else:
            self.stream.write((human if human is not None else _human(record)) + "\n")


def _fmt(v) -> str:
    if isinstance(v, float):
        return format_exponent(v) if math.isinf(v) else f"{v:.12g}"
    return str(v)


def _human(record: dict) -> str:
    return "  ".join(f"{k}={_fmt(v)}" for k, v in record.items() if not isinstance(v, (dict, list)))


# ---------------------------------------------------------------------------
# argument helpers
# ---------------------------------------------------------------------------


def _exponent(text: str) -> float:
    try:
        return parse_exponent(text)
    except ExponentError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def _exponent_list(text: str) -> tuple[float, ...]:
    return tuple(_exponent(t) for t in text.split(",") if t.strip())


def _floats(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


def _groups(text: str) -> tuple[str, ...]:
    out = tuple(t.strip() for t in text.split(",") if t.strip())
    bad = [g for g in out if g not in SUITE_GROUPS]
    if bad:
        raise argparse.ArgumentTypeError(f"unknown check group(s) {bad}; choose from {', '.join(SUITE_GROUPS)}")
    return out


def _nonneg(text: str) -> int:
    try:
        v = int(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from exc
    if v < 0:
        raise argparse.ArgumentTypeError(f"expected a nonnegative integer, got {v}")
    return v


def _config(args) -> OptimizerConfig:
    kw = {"seed": args.seed}
    if getattr(args, "restarts", None) is not None:
        kw["restarts"] = args.restarts
    try:
        return OptimizerConfig(**kw)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _load(path: str) -> Corpus:
    return Corpus.load(path)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_compute(args, out: Printer) -> int:
    corpus = _load(args.input)
    if not 0 <= args.index < len(corpus):
        raise UsageError(f"--index {args.index} out of range for a corpus of {len(corpus)} tuples")
    x = corpus.entries[args.index].x
    fn = certify if args.certify else hypo_norm
    res = fn(x, args.q, _config(args), method=args.method)
    record = {"record": "hypo_norm", "index": args.index, **res.as_dict()}
    human = (f"q={format_exponent(res.q)}  lower={res.lower:.15g}  upper={res.upper:.15g}  "
             f"method={res.method}  upper_source={res.upper_source}\n"
             f"witness={record['witness']}")
    out.emit(record, human)
    return EXIT_OK


def cmd_suite(args, out: Printer) -> int:
    corpus = _load(args.input)
    cfg = _config(args)
    totals = {"verified": 0, "inconclusive": 0, "violated": 0}
    for i, entry in enumerate(corpus.entries):
        seed = entry.spec.seed if entry.spec is not None else None
        report = run_full_suite(entry.x, args.exponents, cfg, seed=seed, groups=args.groups)
        for k, v in report.counts.items():
            totals[k] += v
        record = {"record": "suite_report", "index": i, **report.as_dict()}
        lines = [f"tuple {i}: " + "  ".join(f"{k}={v}" for k, v in report.counts.items())]
        shown = report.records if args.verbose else report.violated
        for r in shown:
            lines.append(f"  {r.verdict:<12} {r.id}  lhs={r.lhs:.12g}  rhs={r.rhs:.12g}  slack={r.slack:.3g}")
        out.emit(record, "\n".join(lines))
    summary = {"record": "suite_summary", "tuples": len(corpus), "counts": totals,
               "exponents": [format_exponent(e) for e in args.exponents]}
    out.emit(summary, "total: " + "  ".join(f"{k}={v}" for k, v in totals.items()))
    return EXIT_VIOLATION if totals["violated"] else EXIT_OK


def cmd_lemma(args, out: Printer) -> int:
    if args.a is None or args.b is None:
        raise UsageError("lemma needs --a and --b")
    try:
        rep = run_lemma(args.id, args.a, args.b, box=args.box or (), w=args.w,
                        variant=args.variant, alpha=args.alpha, strict=not args.no_strict)
    except (PreconditionViolated, ValueError) as exc:
        raise UsageError(str(exc)) from exc
    record = {"record": "lemma_report", **rep.as_dict()}
    out.emit(record)
    ok = rep.holds and rep.lower_holds is not False
    return EXIT_OK if ok else EXIT_VIOLATION


def cmd_fuzz(args, out: Printer) -> int:
    if args.count < 0:
        raise UsageError("--count must be nonnegative")
    if args.suite:
        records = fuzz_suite(args.count, args.seed, jobs=args.jobs, exponents=args.exponents,
                             groups=args.groups)
        for rec in records:
            human = (f"instance {rec['index']}: "
                     + "  ".join(f"{k}={v}" for k, v in rec["counts"].items()))
            out.emit(rec, human)
        summary = suite_summary(records, args.seed)
        dump = None
        if summary["violations"]:
            dump = dump_suite_failures(args.dump or f"fuzz-suite-{args.seed}{SUFFIX}", records, args.seed)
            summary["replay_corpus"] = str(dump)
        out.emit(summary, f"violations={summary['violations']}  "
                          f"worst_relative_slack={summary['worst_relative_slack']:.3g}  "
                          + "  ".join(f"{k}={v}" for k, v in summary["counts"].items()))
        return EXIT_VIOLATION if summary["violations"] else EXIT_OK
    result = fuzz_lemma(args.lemma, args.count, args.seed)
    record = result.as_dict()
    if result.failures:
        path = args.dump or f"fuzz-{args.lemma}-{args.seed}.replay.json"
        record["replay_file"] = str(dump_lemma_failure(path, args.lemma, args.seed, result.failures[0]))
    out.emit(record, f"lemma={args.lemma}  count={args.count}  violations={result.violations}  "
                     f"worst_relative_slack={result.worst_relative_slack:.3g}")
    return EXIT_VIOLATION if result.violations else EXIT_OK


def cmd_gen(args, out: Printer) -> int:
    specs = []
    try:
        for text in args.spec:
            base = parse_genspec(text)
            specs.extend(base.__class__(**{**base.__dict__, "seed": base.seed + i}) for i in range(args.count))
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    corpus = Corpus.from_specs(specs, {"generator": "hyponorm gen", "specs": list(args.spec)})
    path = corpus.save(args.out)
    out.emit({"record": "corpus_written", "path": str(path), "tuples": len(corpus)},
             f"wrote {len(corpus)} tuple(s) to {path}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("human", "jsonl"), default="human",
                        help="human-readable text or one JSON record per line")

    p = argparse.ArgumentParser(prog="hyponorm", description="Hypo-q-norms of vector tuples and their inequalities.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True, metavar="COMMAND")

    c = sub.add_parser("compute", parents=[common], help="hypo-q-norm of one corpus tuple")
    c.add_argument("--input", required=True, help="corpus file")
    c.add_argument("--index", type=_nonneg, default=0)
    c.add_argument("--q", type=_exponent, required=True, help="exponent: inf, integer or a/b")
    c.add_argument("--method", choices=METHOD_CHOICES, default="auto")
    c.add_argument("--seed", type=_nonneg, default=0)
    c.add_argument("--restarts", type=_nonneg)
    c.add_argument("--certify", action="store_true", help="apply every available upper envelope")
    c.set_defaults(func=cmd_compute)

    s = sub.add_parser("suite", parents=[common], help="run every tuple inequality on a corpus")
    s.add_argument("--input", required=True)
    s.add_argument("--exponents", type=_exponent_list, default=DEFAULT_EXPONENTS)
    s.add_argument("--groups", type=_groups, default=SUITE_GROUPS)
    s.add_argument("--seed", type=_nonneg, default=0)
    s.add_argument("--restarts", type=_nonneg)
    s.add_argument("--verbose", action="store_true", help="list every record in human mode")
    s.set_defaults(func=cmd_suite)

    lm = sub.add_parser("lemma", parents=[common], help="evaluate one scalar inequality")
    lm.add_argument("--id", required=True, choices=LEMMA_IDS)
    lm.add_argument("--a", type=_floats, help="first sequence (z for reverse_cbs)")
    lm.add_argument("--b", type=_floats, help="second sequence (y for reverse_cbs)")
    lm.add_argument("--w", type=_floats, help="weights for reverse_cbs")
    lm.add_argument("--box", type=_floats, help="a,A[,b,B] or gamma,Gamma")
    lm.add_argument("--variant", choices=GRUSS_VARIANTS, default="sup")
    lm.add_argument("--alpha", type=_exponent)
    lm.add_argument("--no-strict", action="store_true", help="skip precondition checks")
    lm.set_defaults(func=cmd_lemma)

    f = sub.add_parser("fuzz", parents=[common], help="seeded random testing")
    target = f.add_mutually_exclusive_group(required=True)
    target.add_argument("--lemma", choices=LEMMA_IDS)
    target.add_argument("--suite", action="store_true")
    f.add_argument("--count", type=_nonneg, default=1000)
    f.add_argument("--seed", type=_nonneg, default=0)
    f.add_argument("--jobs", type=_nonneg, default=1, help="worker processes for --suite")
    f.add_argument("--exponents", type=_exponent_list, default=DEFAULT_EXPONENTS)
    f.add_argument("--groups", type=_groups, default=SUITE_GROUPS)
    f.add_argument("--dump", help="where to write a failing instance for replay")
    f.set_defaults(func=cmd_fuzz)

    g = sub.add_parser("gen", parents=[common], help="write a seeded corpus")
    g.add_argument("--spec", required=True, action="append",
                   help="e.g. duplicates,n=2,m=3,seed=7 (repeatable)")
    g.add_argument("--count", type=_nonneg, default=1, help="tuples per spec, consecutive seeds")
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_gen)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    out = Printer(args.format)
    try:
        return args.func(args, out)
    except UsageError as exc:
        print(f"hyponorm {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except MethodMismatchError as exc:
        print(f"hyponorm {args.command}: {exc}", file=sys.stderr)
        return EXIT_METHOD
    except (CorpusError, OSError) as exc:
        print(f"hyponorm {args.command}: {exc}", file=sys.stderr)
        return EXIT_FILE


if __name__ == "__main__":
    sys.exit(main())
