"""Concrete syntax for theory files and terms, and the pretty-printer.

    decl    ::= "symbol" NAME mode? binder* ":" (type | "TYPE")
              | "rule" "[" varctx? "]" term "-->" term
              | "def" NAME ":" type ":=" term
              | "eval" term
    binder  ::= "(" NAME ":" arrtype ")" mode? | "{" NAME ":" arrtype "}"
    arrtype ::= ("(" NAME ":" arrtype ("," NAME ":" arrtype)* ")" "->")* type
    varctx  ::= NAME (":" "(" NAME* ")")? ("," ...)*
    term    ::= NAME ("(" absterm ("," absterm)* ")")?
    absterm ::= (NAME+ ".")? term

Comments run from "--" to the end of the line.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Sequence

from .bidirectional import CheckEntry, InferAllCheck, InferSynth, ModedEntry, ModedTheory, moded_entry
from .errors import ParseError, TypeCheckError
from .rewriting import RewriteRule, constants_of
from .syntax import (
    Arg,
    Context,
    CtxEntry,
    PreSignature,
    Scope,
    ScopeEntry,
    Term,
    TypeExpr,
    erase_context,
)

KEYWORDS = {"symbol", "rule", "def", "eval", "TYPE"}

_TOKEN = re.compile(
    r"""
    (?P<ws>[ \t\r\f]+)
  | (?P<nl>\n)
  | (?P<arrow>-->)
  | (?P<comment>--[^\n]*)
  | (?P<punct>->|→|:=|:|\(|\)|\{|\}|\[|\]|,|\.|\+|-|□)
  | (?P<name>[^\W\d][\w'′]*)
  | (?P<bad>.)
    """,
    re.VERBOSE | re.UNICODE,
)


@dataclass(frozen=True)
class Token:
    kind: str  # "name", "punct", "eof"
    text: str
    line: int
    col: int


def tokenize(text: str) -> list[Token]:
    out = []
    line, start = 1, 0
    for m in _TOKEN.finditer(text):
        kind = m.lastgroup
        col = m.start() - start + 1
        if kind == "nl":
            line += 1
            start = m.end()
        elif kind in ("ws", "comment"):
            pass
        elif kind == "bad":
            raise ParseError(f"unexpected character {m.group()!r}", line, col)
        elif kind == "arrow":
            out.append(Token("punct", "-->", line, col))
        else:
            t = m.group()
            out.append(Token(kind, "->" if t == "→" else t, line, col))
    out.append(Token("eof", "", line, len(text) - start + 1))
    return out


# ---------------------------------------------------------------------------
# Raw syntax


@dataclass
class RawApp:
    name: str
    args: list["RawAbs"]
    tok: Token


@dataclass
class RawAbs:
    binders: list[str]
    body: RawApp


@dataclass
class RawPremise:
    name: str
    premises: list["RawPremise"]
    type: RawApp
    mark: str  # "check", "erased", "synth"
    tok: Token


# ---------------------------------------------------------------------------
# Declarations


@dataclass(frozen=True)
class SymbolDecl:
    entry: ModedEntry
    line: int = field(default=0, compare=False)
    col: int = field(default=0, compare=False)


@dataclass(frozen=True)
class RuleDecl:
    rule: RewriteRule
    line: int = field(default=0, compare=False)
    col: int = field(default=0, compare=False)


@dataclass(frozen=True)
class DefDecl:
    name: str
    type: TypeExpr
    term: Term
    line: int = field(default=0, compare=False)
    col: int = field(default=0, compare=False)

    def entry(self) -> InferAllCheck:
        return InferAllCheck(self.name, (), self.type)

    def rule(self) -> RewriteRule:
        return RewriteRule((), Term(self.name), self.term, self.type.const, f"{self.name}:=")


@dataclass(frozen=True)
class EvalDecl:
    term: Term
    line: int = field(default=0, compare=False)
    col: int = field(default=0, compare=False)


Decl = SymbolDecl | RuleDecl | DefDecl | EvalDecl


@dataclass
class TheoryFile:
    decls: list = field(default_factory=list)

    def theory_before(self, index: int) -> ModedTheory:
        """The moded theory built by the declarations before decls[index]."""
        entries, rules = [], []
        for d in self.decls[:index]:
            match d:
                case SymbolDecl(entry=e):
                    entries.append(e)
                case RuleDecl(rule=r):
                    rules.append(r)
                case DefDecl():
                    entries.append(d.entry())
                    rules.append(d.rule())
        return ModedTheory(entries, rules)

    def theory(self) -> ModedTheory:
        return self.theory_before(len(self.decls))

    @property
    def symbols(self) -> list[SymbolDecl]:
        return [d for d in self.decls if isinstance(d, SymbolDecl)]

    @property
    def rules(self) -> list[RuleDecl]:
        return [d for d in self.decls if isinstance(d, RuleDecl)]

    @property
    def defs(self) -> list[DefDecl]:
        return [d for d in self.decls if isinstance(d, DefDecl)]

    @property
    def evals(self) -> list[EvalDecl]:
        return [d for d in self.decls if isinstance(d, EvalDecl)]


# ---------------------------------------------------------------------------
# Parser


class _Parser:
    def __init__(self, text: str):
        self.toks = tokenize(text)
        self.i = 0

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def peek(self, k: int = 0) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def error(self, msg: str, tok: Token | None = None) -> ParseError:
        tok = tok or self.tok
        return ParseError(msg, tok.line, tok.col)

    def at(self, text: str) -> bool:
        return self.tok.kind == "punct" and self.tok.text == text

    def accept(self, text: str) -> bool:
        if self.at(text):
            self.i += 1
            return True
        return False

    def expect(self, text: str) -> Token:
        if not self.at(text):
            got = self.tok.text or "end of input"
            raise self.error(f"expected {text!r}, got {got!r}")
        t = self.tok
        self.i += 1
        return t

    def name(self) -> Token:
        t = self.tok
        if t.kind != "name" or t.text in KEYWORDS:
            raise self.error(f"expected a name, got {t.text or 'end of input'!r}")
        self.i += 1
        return t

    def keyword(self) -> str | None:
        t = self.tok
        return t.text if t.kind == "name" and t.text in KEYWORDS else None

    # -- terms ---------------------------------------------------------------

    def term(self) -> RawApp:
        t = self.name()
        args: list[RawAbs] = []
        if self.accept("("):
            if self.accept(")"):
                return RawApp(t.text, args, t)
            args.append(self.absterm())
            while self.accept(","):
                args.append(self.absterm())
            self.expect(")")
        return RawApp(t.text, args, t)

    def absterm(self) -> RawAbs:
        j = 0
        while self.peek(j).kind == "name" and self.peek(j).text not in KEYWORDS:
            j += 1
        if j and self.peek(j).kind == "punct" and self.peek(j).text == ".":
            binders = [self.name().text for _ in range(j)]
            self.expect(".")
            return RawAbs(binders, self.term())
        return RawAbs([], self.term())

    # -- premises ------------------------------------------------------------

    def arrtype(self) -> tuple[list[RawPremise], RawApp]:
        prems: list[RawPremise] = []
        while self.at("("):
            self.expect("(")
            prems.append(self.premise_body("check"))
            while self.accept(","):
                prems.append(self.premise_body("check"))
            self.expect(")")
            self.expect("->")
        return prems, self.term()

    def premise_body(self, mark: str) -> RawPremise:
        t = self.name()
        self.expect(":")
        prems, ty = self.arrtype()
        return RawPremise(t.text, prems, ty, mark, t)

    def binder(self) -> RawPremise:
        if self.accept("{"):
            p = self.premise_body("erased")
            self.expect("}")
            return p
        self.expect("(")
        p = self.premise_body("check")
        self.expect(")")
        if self.accept("+"):
            p.mark = "synth"
        else:
            self.accept("-")
        return p

    def context(self) -> list[RawPremise]:
        out = []
        if self.tok.kind == "eof":
            return out
        out.append(self.premise_body("check"))
        while self.accept(","):
            out.append(self.premise_body("check"))
        return out


# ---------------------------------------------------------------------------
# Resolution of raw syntax against a pre-signature


class _Resolver:
    def __init__(self, presig: PreSignature):
        self.presig = presig

    def err(self, msg: str, tok: Token) -> ParseError:
        return ParseError(msg, tok.line, tok.col)

    def lookup(self, env: Sequence[ScopeEntry], name: str):
        for pos in range(len(env) - 1, -1, -1):
            if env[pos].name == name:
                return len(env) - 1 - pos, env[pos]
        return None, None

    def term(self, raw: RawApp, env: tuple[ScopeEntry, ...], sort: str | None) -> Term:
        idx, entry = self.lookup(env, raw.name)
        if entry is not None:
            arity, result, head = entry.scope, entry.sort, idx
        else:
            pe = self.presig.get(raw.name)
            if pe is None:
                raise self.err(f"unbound identifier {raw.name}", raw.tok)
            if pe.type_level:
                raise self.err(f"{raw.name} is a type, not a term", raw.tok)
            arity, result, head = pe.scope, pe.result, raw.name
        if sort is not None and result != sort:
            raise self.err(f"{raw.name} has sort {result}, expected {sort}", raw.tok)
        args = self.spine(raw, env, arity)
        return Term(head, args, raw.name if isinstance(head, int) else None)

    def spine(self, raw: RawApp, env, arity: Scope) -> tuple[Arg, ...]:
        if len(raw.args) != len(arity):
            raise self.err(f"{raw.name} expects {len(arity)} arguments, got {len(raw.args)}", raw.tok)
        out = []
        for a, e in zip(raw.args, arity):
            if len(a.binders) != len(e.scope):
                raise self.err(
                    f"argument {e.name} of {raw.name} binds {len(e.scope)} variables, got {len(a.binders)}",
                    a.body.tok,
                )
            if len(set(a.binders)) != len(a.binders):
                raise self.err("repeated bound variable", a.body.tok)
            ext = tuple(ScopeEntry(n, b.scope, b.sort) for n, b in zip(a.binders, e.scope))
            out.append(Arg(tuple(a.binders), self.term(a.body, env + ext, e.sort)))
        return tuple(out)

    def type(self, raw: RawApp, env) -> TypeExpr:
        if raw.name in KEYWORDS:
            raise self.err("TYPE is not a type", raw.tok)
        idx, entry = self.lookup(env, raw.name)
        pe = self.presig.get(raw.name)
        if entry is not None or pe is None:
            raise self.err(f"{raw.name} is not a type constant", raw.tok)
        if not pe.type_level:
            raise self.err(f"{raw.name} is a term constant, not a type", raw.tok)
        return TypeExpr(raw.name, self.spine(raw, env, pe.scope))

    def context(self, prems: Sequence[RawPremise], env) -> Context:
        out: list[CtxEntry] = []
        seen = set()
        cur = tuple(env)
        for p in prems:
            if p.name in seen:
                raise self.err(f"duplicate premise name {p.name}", p.tok)
            seen.add(p.name)
            sub = self.context(p.premises, cur)
            ty = self.type(p.type, cur + erase_context(sub))
            e = CtxEntry(p.name, sub, ty)
            out.append(e)
            cur = cur + (ScopeEntry(p.name, erase_context(sub), ty.const),)
        return tuple(out)


def _as_presig(where) -> PreSignature:
    if isinstance(where, PreSignature):
        return where
    return where.presig


def _as_scope(scope) -> Scope:
    if scope and isinstance(scope[0], CtxEntry):
        return erase_context(scope)
    return tuple(scope)


def parse_term(text: str, where, scope=(), sort: str | None = None) -> Term:
    """Parse a term against a pre-signature (or theory) in a scope or context."""
    p = _Parser(text)
    raw = p.term()
    if p.tok.kind != "eof":
        raise p.error(f"unexpected {p.tok.text!r}")
    return _Resolver(_as_presig(where)).term(raw, _as_scope(scope), sort)


def parse_type(text: str, where, scope=()) -> TypeExpr:
    p = _Parser(text)
    raw = p.term()
    if p.tok.kind != "eof":
        raise p.error(f"unexpected {p.tok.text!r}")
    return _Resolver(_as_presig(where)).type(raw, _as_scope(scope))


def parse_context(text: str, where, scope=()) -> Context:
    """Parse "x : T, f : (y : A) -> B" into a context."""
    p = _Parser(text)
    prems = p.context()
    if p.tok.kind != "eof":
        raise p.error(f"unexpected {p.tok.text!r}")
    return _Resolver(_as_presig(where)).context(prems, _as_scope(scope))


class _TheoryBuilder:
    def __init__(self):
        self.file = TheoryFile()
        self.entries: list[ModedEntry] = []
        self.rule_count = 0
        self._presig: PreSignature | None = None

    @property
    def presig(self) -> PreSignature:
        if self._presig is None:
            self._presig = ModedTheory(self.entries).presig
        return self._presig

    def add_entry(self, e: ModedEntry, tok: Token) -> None:
        if any(x.name == e.name for x in self.entries):
            raise ParseError(f"duplicate constant {e.name}", tok.line, tok.col)
        self.entries.append(e)
        self._presig = None


def parse_theory(text: str) -> TheoryFile:
    p = _Parser(text)
    b = _TheoryBuilder()
    while p.tok.kind != "eof":
        kw = p.keyword()
        start = p.tok
        if kw == "symbol":
            p.i += 1
            d = _symbol(p, b, start)
        elif kw == "rule":
            p.i += 1
            d = _rule(p, b, start)
        elif kw == "def":
            p.i += 1
            d = _def(p, b, start)
        elif kw == "eval":
            p.i += 1
            raw = p.term()
            d = EvalDecl(_Resolver(b.presig).term(raw, (), None), start.line, start.col)
        else:
            raise p.error(f"expected a declaration, got {p.tok.text!r}")
        b.file.decls.append(d)
    return b.file


def _symbol(p: _Parser, b: _TheoryBuilder, start: Token) -> SymbolDecl:
    name = p.name()
    if name.text in b.presig:
        raise p.error(f"duplicate constant {name.text}", name)
    mode = None
    if p.at("+") or p.at("-"):
        mode = p.tok.text
        p.i += 1
    prems = []
    while p.at("(") or p.at("{"):
        prems.append(p.binder())
    p.expect(":")
    res = _Resolver(b.presig)
    ctx = res.context(prems, ())
    if p.tok.kind == "name" and p.tok.text == "TYPE" or p.at("□"):
        p.i += 1
        result = None
        if mode is not None:
            raise p.error(f"type-level constant {name.text} takes no mode", name)
    else:
        result = res.type(p.term(), erase_context(ctx))
    try:
        entry = moded_entry(name.text, mode, ctx, [x.mark for x in prems], result)
    except TypeCheckError as e:
        raise ParseError(str(e), name.line, name.col) from None
    b.add_entry(entry, name)
    return SymbolDecl(entry, start.line, start.col)


def _infer_rule_arities(res: _Resolver, raw: RawApp, rvars: dict, binders: tuple[ScopeEntry, ...], sort, found: dict):
    bound = any(e.name == raw.name for e in binders)
    if raw.name in rvars and not bound:
        prev = found.get(raw.name)
        cur = (binders, sort)
        if prev is not None and (prev[0] != binders or prev[1] != sort):
            raise res.err(f"rule variable {raw.name} is used at two different arities", raw.tok)
        found[raw.name] = cur
        return
    if bound:
        return
    pe = res.presig.get(raw.name)
    if pe is None:
        raise res.err(f"unbound identifier {raw.name}", raw.tok)
    if len(raw.args) != len(pe.scope):
        raise res.err(f"{raw.name} expects {len(pe.scope)} arguments, got {len(raw.args)}", raw.tok)
    for a, e in zip(raw.args, pe.scope):
        if len(a.binders) != len(e.scope):
            raise res.err(f"argument {e.name} of {raw.name} binds {len(e.scope)} variables", a.body.tok)
        ext = tuple(ScopeEntry(n, x.scope, x.sort) for n, x in zip(a.binders, e.scope))
        _infer_rule_arities(res, a.body, rvars, binders + ext, e.sort, found)


def _rule(p: _Parser, b: _TheoryBuilder, start: Token) -> RuleDecl:
    p.expect("[")
    rvars: dict[str, tuple[Token, list[str] | None]] = {}
    if not p.at("]"):
        while True:
            t = p.name()
            declared = None
            if p.accept(":"):
                p.expect("(")
                declared = []
                while not p.at(")"):
                    declared.append(p.name().text)
                p.expect(")")
            if t.text in rvars:
                raise p.error(f"duplicate rule variable {t.text}", t)
            rvars[t.text] = (t, declared)
            if not p.accept(","):
                break
    p.expect("]")
    lhs_raw = p.term()
    p.expect("-->")
    rhs_raw = p.term()
    res = _Resolver(b.presig)
    head = b.presig.get(lhs_raw.name)
    if lhs_raw.name in rvars or head is None or head.type_level:
        raise res.err("the left-hand side must be headed by a term constant", lhs_raw.tok)
    found: dict = {}
    _infer_rule_arities(res, lhs_raw, rvars, (), head.result, found)
    scope = []
    for n, (tok, declared) in rvars.items():
        if n not in found:
            raise res.err(f"rule variable {n} does not occur in the left-hand side", tok)
        arity, sort = found[n]
        if declared is not None:
            if len(declared) != len(arity):
                raise res.err(f"rule variable {n} is declared with {len(declared)} bound variables, used with {len(arity)}", tok)
            arity = tuple(ScopeEntry(d, a.scope, a.sort) for d, a in zip(declared, arity))
        scope.append(ScopeEntry(n, tuple(arity), sort))
    scope = tuple(scope)
    lhs = res.term(lhs_raw, scope, head.result)
    rhs = res.term(rhs_raw, scope, head.result)
    b.rule_count += 1
    rule = RewriteRule(scope, lhs, rhs, head.result, f"{lhs_raw.name}@{start.line}")
    return RuleDecl(rule, start.line, start.col)


def _def(p: _Parser, b: _TheoryBuilder, start: Token) -> DefDecl:
    name = p.name()
    if name.text in b.presig:
        raise p.error(f"duplicate constant {name.text}", name)
    p.expect(":")
    res = _Resolver(b.presig)
    ty = res.type(p.term(), ())
    p.expect(":=")
    term = res.term(p.term(), (), ty.const)
    d = DefDecl(name.text, ty, term, start.line, start.col)
    b.add_entry(d.entry(), name)
    return d


# ---------------------------------------------------------------------------
# Printing


def _fresh(base: str, taken: set[str]) -> str:
    if base not in taken:
        return base
    stem = base.rstrip("0123456789") or "x"
    n = 1
    while f"{stem}{n}" in taken:
        n += 1
    return f"{stem}{n}"


class _Printer:
    def __init__(self, avoid: set[str]):
        self.avoid = avoid

    def term(self, t: Term, env: list[str]) -> str:
        h = t.head
        if type(h) is int:
            name = env[len(env) - 1 - h] if h < len(env) else f"#{h}"
        else:
            name = h
        if not t.args:
            return name
        return f"{name}({', '.join(self.arg(a, env) for a in t.args)})"

    def arg(self, a: Arg, env: list[str]) -> str:
        if not a.names:
            return self.term(a.body, env)
        taken = set(env) | self.avoid
        fresh = []
        for n in a.names:
            f = _fresh(n or "x", taken)
            taken.add(f)
            fresh.append(f)
        return f"{' '.join(fresh)}. {self.term(a.body, env + fresh)}"

    def type(self, t: TypeExpr, env: list[str]) -> str:
        if not t.args:
            return t.const
        return f"{t.const}({', '.join(self.arg(a, env) for a in t.args)})"

    def premise(self, e: CtxEntry, env: list[str]) -> tuple[str, str]:
        """(chosen name, "name : arrtype")."""
        taken = set(env) | self.avoid
        name = _fresh(e.name, taken)
        inner, cur = [], list(env)
        for p in e.premises:
            pn, ptxt = self.premise(p, cur)
            inner.append(f"({ptxt}) -> ")
            cur.append(pn)
        return name, f"{name} : {''.join(inner)}{self.type(e.type, cur)}"

    def context(self, g: Context, env: list[str]) -> tuple[list[str], list[str]]:
        texts, cur = [], list(env)
        for e in g:
            n, txt = self.premise(e, cur)
            texts.append(txt)
            cur.append(n)
        return cur, texts


def print_expr(e, names: Sequence[str] = (), avoid: set[str] | None = None) -> str:
    """Print a term, type, spine or context; `names` are the ambient variables."""
    if avoid is None:
        avoid = constants_of(e) if not isinstance(e, Arg) else constants_of(e.body)
    pr = _Printer(set(avoid))
    env = list(names)
    if isinstance(e, Term):
        return pr.term(e, env)
    if isinstance(e, TypeExpr):
        return pr.type(e, env)
    if isinstance(e, Arg):
        return pr.arg(e, env)
    if isinstance(e, tuple) and e and isinstance(e[0], Arg):
        return ", ".join(pr.arg(a, env) for a in e)
    if isinstance(e, tuple):
        return ", ".join(pr.context(e, env)[1])
    raise TypeError(f"not an expression: {e!r}")


def print_entry(e: ModedEntry) -> str:
    u = e.underlying()
    pr = _Printer(constants_of(u.premises) | (constants_of(u.result) if u.result else set()))
    marks = ["check"] * len(u.premises)
    mode = ""
    match e:
        case CheckEntry(erased=erased):
            mode = " -"
            marks[: len(erased)] = ["erased"] * len(erased)
        case InferSynth(before=before, erased=erased):
            mode = " +"
            n1 = len(before)
            marks[n1 : n1 + len(erased)] = ["erased"] * len(erased)
            marks[n1 + len(erased)] = "synth"
    env: list[str] = []
    parts = []
    for p, m in zip(u.premises, marks):
        n, txt = pr.premise(p, env)
        env.append(n)
        parts.append({"erased": f"{{{txt}}}", "synth": f"({txt})+", "check": f"({txt})"}[m])
    result = "TYPE" if u.result is None else pr.type(u.result, env)
    prem_txt = (" " + " ".join(parts)) if parts else ""
    return f"symbol {e.name}{mode}{prem_txt} : {result}"


def print_rule(r: RewriteRule) -> str:
    names = [e.name for e in r.scope]
    avoid = constants_of(r.lhs) | constants_of(r.rhs)
    return f"rule [{', '.join(names)}] {print_expr(r.lhs, names, avoid)} --> {print_expr(r.rhs, names, avoid)}"


def print_decl(d) -> str:
    match d:
        case SymbolDecl(entry=e):
            return print_entry(e)
        case RuleDecl(rule=r):
            return print_rule(r)
        case DefDecl(name=n, type=ty, term=t):
            return f"def {n} : {print_expr(ty)} := {print_expr(t)}"
        case EvalDecl(term=t):
            return f"eval {print_expr(t)}"
    raise TypeError(d)


def print_theory(f: TheoryFile) -> str:
    return "".join(print_decl(d) + "\n" for d in f.decls)


def print_presignature(ps: PreSignature) -> str:
    """One `c :: arity` line per constant, with arities written `(x :: s) → s`."""
    lines = []
    for e in ps:
        lines.append(f"{e.name} :: {_arity(e.scope, e.result)}")
    return "\n".join(lines) + ("\n" if lines else "")


def _arity(scope: Scope, result: str) -> str:
    if not scope:
        return result
    return "".join(f"({e.name} :: {_arity(e.scope, e.sort)})" for e in scope) + f" → {result}"
