"""Command-line entry point: `complf check|eval|lint FILE`.

Exit status is 0 on success, 1 on a parse, validation or typing error and 2
on a usage or I/O error. Diagnostics go to standard error as FILE:LINE:COL.
"""

from __future__ import annotations

import argparse
import sys
import time
from dataclasses import dataclass

from .bidirectional import Checker, ModedTheory, elaborate_signature, ill_moded_hint
from .declarative import Oracle, check_signature
from .deep import run_deep
from .errors import ComplfError, NoInferRule, ParseError
from .patterns import rigidity
from .rewriting import Fuel, lint_left_linear, lint_orthogonal, normalize, validate_rule
from .surface import DefDecl, EvalDecl, SymbolDecl, TheoryFile, parse_theory, print_expr, print_rule

EXIT_OK, EXIT_ERROR, EXIT_USAGE = 0, 1, 2


@dataclass
class RunConfig:
    command: str
    path: str
    fuel: int | None = None
    verbose: int = 0
    oracle_crosscheck: bool = False

    def __post_init__(self):
        if self.fuel is not None and self.fuel < 1:
            raise ValueError("fuel must be at least 1")


@dataclass
class Session:
    cfg: RunConfig
    errors: int = 0

    def diag(self, line: int, col: int, message: str, severity: str = "error") -> None:
        if severity == "error":
            self.errors += 1
        print(f"{self.cfg.path}:{line}:{col}: {severity}: {message}", file=sys.stderr)

    def out(self, text: str) -> None:
        print(text)

    def info(self, text: str) -> None:
        if self.cfg.verbose:
            print(text, file=sys.stderr)

    def fuel(self) -> Fuel:
        return Fuel(self.cfg.fuel)


def _load(s: Session) -> TheoryFile | None:
    try:
        with open(s.cfg.path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as e:
        print(f"{s.cfg.path}: {e.strerror or e}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)
    try:
        return parse_theory(text)
    except ParseError as e:
        s.diag(e.line, e.col, e.message)
        return None


def _positions(f: TheoryFile) -> dict[str, tuple[int, int]]:
    out = {}
    for d in f.decls:
        match d:
            case SymbolDecl(entry=e):
                out[e.name] = (d.line, d.col)
            case DefDecl(name=n):
                out[n] = (d.line, d.col)
    return out


def _validate(s: Session, f: TheoryFile, mthy: ModedTheory) -> dict | None:
    """Validate symbols and rules; return the signature elaborations."""
    pos = _positions(f)
    elab, rep = elaborate_signature(mthy, s.fuel())
    for d in rep.items:
        line, col = pos.get(d.subject, (1, 1))
        s.diag(line, col, f"{d.subject}: {d.message}", d.severity)
    for d in f.rules:
        for item in validate_rule(mthy.presig, d.rule).items:
            s.diag(d.line, d.col, item.message, item.severity)
    return elab if rep.ok else None


def _check_def(s: Session, f: TheoryFile, index: int, d: DefDecl) -> None:
    mthy = f.theory_before(index)
    ck = Checker(mthy, s.fuel())
    try:
        ty = ck.type_wf((), d.type)
        elab = ck.check((), d.term, d.type)
    except NoInferRule as e:
        hint = ill_moded_hint(mthy, d.term)
        s.diag(d.line, d.col, f"{d.name}: NoInferRule: {e}" + (f" ({hint})" if hint else ""))
        return
    except ComplfError as e:
        s.diag(d.line, d.col, f"{d.name}: {type(e).__name__}: {e}")
        return
    if s.cfg.oracle_crosscheck:
        o = Oracle(mthy.theory(), s.fuel())
        try:
            o.type_wf((), ty)
            o.check((), elab, d.type)
        except ComplfError as e:
            s.diag(d.line, d.col, f"{d.name}: oracle disagrees with the checker: {e}")
            return
    s.info(f"{d.name} : {print_expr(d.type)} checked")


def _check_eval(s: Session, f: TheoryFile, index: int, d: EvalDecl):
    mthy = f.theory_before(index)
    ck = Checker(mthy, s.fuel())
    try:
        ty, elab = ck.infer((), d.term)
    except ComplfError as e:
        hint = ill_moded_hint(mthy, d.term) if isinstance(e, NoInferRule) else None
        s.diag(d.line, d.col, f"{type(e).__name__}: {e}" + (f" ({hint})" if hint else ""))
        return None
    if s.cfg.oracle_crosscheck:
        try:
            Oracle(mthy.theory(), s.fuel()).check((), elab, ty)
        except ComplfError as e:
            s.diag(d.line, d.col, f"oracle disagrees with the checker: {e}")
            return None
    return mthy, ty


def _check_all(s: Session, f: TheoryFile) -> list:
    mthy = f.theory()
    if _validate(s, f, mthy) is None or s.errors:
        return []
    evals = []
    for i, d in enumerate(f.decls):
        match d:
            case DefDecl():
                _check_def(s, f, i, d)
            case EvalDecl():
                evals.append((d, _check_eval(s, f, i, d)))
    return evals


def run_check(cfg: RunConfig) -> int:
    s = Session(cfg)
    f = _load(s)
    if f is None:
        return EXIT_ERROR
    _check_all(s, f)
    if s.errors:
        return EXIT_ERROR
    s.out(f"ok: {len(f.symbols)} symbols, {len(f.rules)} rules, {len(f.defs)} definitions checked")
    return EXIT_OK


def run_eval(cfg: RunConfig) -> int:
    s = Session(cfg)
    f = _load(s)
    if f is None:
        return EXIT_ERROR
    evals = _check_all(s, f)
    if s.errors:
        return EXIT_ERROR
    for d, checked in evals:
        mthy, ty = checked
        fuel = s.fuel()
        t0 = time.perf_counter()
        try:
            nf = normalize(mthy.system, d.term, fuel)
        except ComplfError as e:
            s.diag(d.line, d.col, f"{type(e).__name__}: {e}")
            return EXIT_ERROR
        dt = time.perf_counter() - t0
        s.out(f"{print_expr(nf)} : {print_expr(normalize(mthy.system, ty, s.fuel()))}")
        s.out(f"  -- {fuel.used} steps, {dt:.3f} s")
    return EXIT_OK


def run_lint(cfg: RunConfig) -> int:
    s = Session(cfg)
    f = _load(s)
    if f is None:
        return EXIT_ERROR
    mthy = f.theory()
    elab = _validate(s, f, mthy)
    if elab is not None:
        pos = _positions(f)
        for d in check_signature(mthy.theory(), elab, s.fuel()).items:
            line, col = pos.get(d.subject, (1, 1))
            s.diag(line, col, f"{d.subject}: {d.message}")
    for d in f.rules:
        label = print_rule(d.rule)
        if lint_left_linear(d.rule):
            s.out(f"left-linear: {label}")
        else:
            s.out(f"non-left-linear: {label}")
            s.diag(d.line, d.col, f"rule is not left-linear: {label}", "warning")
    rep = lint_orthogonal(mthy.system)
    by_label = {d.rule.name: d for d in f.rules}
    for o in rep.overlaps:
        s.out(f"overlap: {o}")
        at = by_label.get(o.outer)
        s.diag(at.line if at else 1, at.col if at else 1, f"possible critical pair: {o}", "warning")
    for e in mthy.entries:
        w = mthy.witness(e) if hasattr(e, "erased") else None
        if w is None:
            continue
        r = rigidity(mthy.system, mthy.sig, w)
        verdict = "rigid" if r.h1_ok and r.h2_ok else "not rigid"
        s.out(f"pattern of {e.name}: {verdict} (constants: {', '.join(sorted(w.constants))})")
    n_nonlinear = sum(1 for d in f.rules if not lint_left_linear(d.rule))
    if rep.orthogonal:
        s.out("orthogonal; all rules left-linear")
    else:
        s.out(f"not orthogonal: {n_nonlinear} non-left-linear rules, {len(rep.overlaps)} overlaps")
    return EXIT_ERROR if s.errors else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="complf", description="Check, evaluate and lint .clf theory files.")
    sub = p.add_subparsers(dest="command", required=True)
    for name, helptext in [
        ("check", "validate the theory and type-check its definitions"),
        ("eval", "type-check, then normalize each eval declaration"),
        ("lint", "report left-linearity, overlaps, rigidity and signature typing"),
    ]:
        c = sub.add_parser(name, help=helptext)
        c.add_argument("file")
        c.add_argument("--fuel", type=int, default=None, help="rewrite step budget (default: COMPLF_FUEL or 10^7)")
        c.add_argument("-v", "--verbose", action="count", default=0)
        c.add_argument("--oracle-crosscheck", action="store_true", help="replay every elaboration through the declarative oracle")
    return p


COMMANDS = {"check": run_check, "eval": run_eval, "lint": run_lint}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.fuel is not None and args.fuel < 1:
        parser.error("--fuel must be a positive integer")
    cfg = RunConfig(args.command, args.file, args.fuel, args.verbose, args.oracle_crosscheck)
    try:
        return run_deep(COMMANDS[cfg.command], cfg)
    except SystemExit as e:
        return int(e.code or 0)


if __name__ == "__main__":
    sys.exit(main())
