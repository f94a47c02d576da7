"""Shared test machinery: theories, generators, enumerators and the
elaborated mirror of rewriting used for subject-reduction sampling."""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from functools import lru_cache

import complf as c
from complf.bidirectional import Checker, ModedTheory, elaborate_context
from complf.declarative import Oracle, Theory, erase_elaborated, erase_elaborated_context
from complf.errors import ComplfError
from complf.rewriting import Fuel, RewriteSystem
from complf.subst import shift, strengthen, substitute
from complf.syntax import Arg, CtxEntry, PreSignature, ScopeEntry, Term, TypeExpr, erase_context
from complf.surface import DefDecl, EvalDecl, parse_context, parse_term, parse_type

GOLDEN = ("lambda_pi", "equality", "universes")


# ---------------------------------------------------------------------------
# Theories


@lru_cache(maxsize=None)
def theory_file(name: str):
    return c.load_theory(name)


@lru_cache(maxsize=None)
def golden(name: str) -> ModedTheory:
    """Symbols and rules of a bundled theory, without its defs and evals."""
    f = theory_file(name)
    cut = next((i for i, d in enumerate(f.decls) if isinstance(d, (DefDecl, EvalDecl))), len(f.decls))
    return f.theory_before(cut)


def term(m, text: str, ctx=(), sort=None) -> Term:
    return parse_term(text, m, ctx, sort)


def ty(m, text: str, ctx=()) -> TypeExpr:
    return parse_type(text, m, ctx)


def ctx(m, text: str):
    return parse_context(text, m)


def tm_of(a: Term) -> TypeExpr:
    return TypeExpr("Tm", (Arg((), a),))


def size(t: Term) -> int:
    return 1 + sum(size(a.body) for a in t.args)


# ---------------------------------------------------------------------------
# Exhaustive enumeration of scope-valid terms


class Enumerator:
    """All scope-valid terms of a given node count, memoized per scope."""

    def __init__(self, presig: PreSignature):
        self.presig = presig
        self.memo: dict = {}

    def terms(self, scope: tuple[ScopeEntry, ...], sort: str, n: int) -> list[Term]:
        key = (scope, sort, n)
        if key in self.memo:
            return self.memo[key]
        out: list[Term] = []
        if n >= 1:
            heads: list[tuple[int | str, tuple]] = []
            for pos, e in enumerate(scope):
                if e.sort == sort:
                    heads.append((len(scope) - 1 - pos, e.scope))
            for pe in self.presig:
                if not pe.type_level and pe.result == sort:
                    heads.append((pe.name, pe.scope))
            for h, arity in heads:
                for sp in self.spines(scope, arity, n - 1):
                    out.append(Term(h, sp, scope[len(scope) - 1 - h].name if type(h) is int else None))
        self.memo[key] = out
        return out

    def spines(self, scope, arity, n: int) -> list[tuple[Arg, ...]]:
        if not arity:
            return [()] if n == 0 else []
        out = []
        first, rest = arity[0], arity[1:]
        for k in range(1, n - len(rest) + 1):
            ext = scope + tuple(first.scope)
            heads = self.terms(ext, first.sort, k)
            if not heads:
                continue
            tails = self.spines(scope, rest, n - k)
            names = tuple(e.name for e in first.scope)
            for h in heads:
                a = Arg(names, h)
                for tl in tails:
                    out.append((a,) + tl)
        return out

    def up_to(self, scope, sort, n: int) -> list[Term]:
        return [t for k in range(1, n + 1) for t in self.terms(scope, sort, k)]


def is_beta_normal(t: Term) -> bool:
    """No subterm App(Lam(...), _) in the erased lambda calculus."""
    stack = [t]
    while stack:
        x = stack.pop()
        if x.head == "App" and x.args[0].body.head == "Lam":
            return False
        stack.extend(a.body for a in x.args)
    return True


# ---------------------------------------------------------------------------
# Random raw syntax


class RawGen:
    """Seeded generator of scope-valid (untyped) expressions."""

    def __init__(self, presig: PreSignature, rng: random.Random):
        self.presig = presig
        self.rng = rng
        self.sorts = sorted({pe.name for pe in presig if pe.type_level})

    def term(self, scope, sort: str, budget: int) -> Term | None:
        heads = [(len(scope) - 1 - p, e.scope, e.name) for p, e in enumerate(scope) if e.sort == sort]
        heads += [(pe.name, pe.scope, None) for pe in self.presig if not pe.type_level and pe.result == sort]
        if not heads:
            return None
        if budget <= 0:
            leaves = [h for h in heads if not h[1]]
            heads = leaves or heads[:0]
            if not heads:
                return None
        self.rng.shuffle(heads)
        for h, arity, name in heads[:3]:
            sp = self.spine(scope, arity, budget - 1)
            if sp is not None:
                return Term(h, sp, name)
        return None

    def spine(self, scope, arity, budget: int) -> tuple[Arg, ...] | None:
        out = []
        for e in arity:
            b = self.term(scope + tuple(e.scope), e.sort, budget - self.rng.randrange(0, 2))
            if b is None:
                return None
            out.append(Arg(tuple(x.name for x in e.scope), b))
        return tuple(out)

    def scope(self, n: int, prefix: str = "v", order: int = 1) -> tuple[ScopeEntry, ...]:
        out = []
        for i in range(n):
            inner = ()
            if order and self.rng.random() < 0.3:
                inner = self.scope(self.rng.randrange(1, 3), prefix=f"{prefix}{i}_", order=0)
            out.append(ScopeEntry(f"{prefix}{i}", inner, self.rng.choice(self.sorts)))
        return tuple(out)

    def spine_for(self, scope, against, budget: int) -> tuple[Arg, ...] | None:
        return self.spine(scope, against, budget)

    def type(self, scope, budget: int) -> TypeExpr | None:
        tls = [pe for pe in self.presig if pe.type_level]
        self.rng.shuffle(tls)
        for pe in tls:
            sp = self.spine(scope, pe.scope, budget - 1)
            if sp is not None:
                return TypeExpr(pe.name, sp)
        return None

    def context(self, scope, n: int, budget: int, depth: int = 1):
        out: list[CtxEntry] = []
        cur = tuple(scope)
        for i in range(n):
            prem = ()
            if depth and self.rng.random() < 0.3:
                prem = self.context(cur, self.rng.randrange(1, 3), budget - 1, depth - 1)
                if prem is None:
                    return None
            t = self.type(cur + erase_context(prem), budget)
            if t is None:
                return None
            e = CtxEntry(f"c{len(cur)}_{i}", prem, t)
            out.append(e)
            cur = cur + (ScopeEntry(e.name, erase_context(prem), t.const),)
        return tuple(out)


# ---------------------------------------------------------------------------
# Type-directed generation of well-typed elaborated terms

BASE_CONTEXT = {
    "lambda_pi": "A : Ty, B : (x : Tm(A)) -> Ty, a : Tm(A), f : Tm(Pi(A, x. A)), g : Tm(Pi(A, x. B(x)))",
    "equality": "A : Ty, a : Tm(A), b : Tm(A), e : Tm(Eq(A, a, b)), f : Tm(Pi(A, x. A))",
    "universes": "A : Ty, a : Tm(A), k : Lvl, c : Tm(U(Zero)), d : Tm(U(k))",
}


@dataclass
class Sample:
    """A generated elaborated term `elab` of surface type `type` in `ctx`."""

    ctx: tuple  # surface context
    elab: Term
    type: TypeExpr


class ElabGen:
    """Builds random elaborated terms, type-directed, with redexes on purpose."""

    def __init__(self, name: str, rng: random.Random, redex_bias: float = 0.35):
        self.name = name
        self.m = golden(name)
        self.sig = self.m.sig
        self.sys = self.m.system
        self.rng = rng
        self.redex_bias = redex_bias
        self.has_eq = self.m.get("Eq") is not None
        self.has_univ = self.m.get("U") is not None
        self.g0 = parse_context(BASE_CONTEXT[name], self.m)
        self.ge0 = elaborate_context(self.m, self.g0)

    # -- helpers ---------------------------------------------------------------

    def erase(self, t: Term) -> Term:
        return erase_elaborated(self.sig, t)

    def nf(self, t: Term) -> Term:
        return c.normalize(self.sys, t, Fuel(10**6))

    def elab_of(self, g, s: Term) -> Term:
        """An elaborated form of a surface Ty term (via the checker on its normal form)."""
        _, e = Checker(self.m, Fuel(10**6)).infer(g, self.nf(s))
        return e

    def vars_of_type(self, g, ge, want: Term, sort: str = "Tm"):
        out = []
        for i in range(len(g)):
            prem, t = c.declarative.lookup_var(g, i)
            if prem or t.const != sort:
                continue
            if sort == "Tm" and self.nf(t.args[0].body) != want:
                continue
            out.append(Term(i, (), g[len(g) - 1 - i].name))
        return out

    # -- types -------------------------------------------------------------------

    def level(self, g) -> Term:
        opts = [Term("Zero"), Term("Succ", (Arg((), Term("Zero")),))]
        for i in range(len(g)):
            prem, t = c.declarative.lookup_var(g, i)
            if not prem and t.const == "Lvl":
                opts.append(Term(i, (), g[len(g) - 1 - i].name))
        return self.rng.choice(opts)

    def gen_ty(self, g, ge, d: int) -> Term | None:
        opts = ["var"] + (["pi", "pi", "fam"] if d > 0 else [])
        if self.has_eq and d > 0:
            opts += ["eq"]
        if self.has_univ:
            opts += ["U"] + (["El", "El"] if d > 0 else [])
        self.rng.shuffle(opts)
        for o in opts:
            r = self._ty(o, g, ge, d)
            if r is not None:
                return r
        return None

    def _ty(self, o, g, ge, d):
        match o:
            case "var":
                vs = self.vars_of_type(g, ge, None, "Ty")
                return self.rng.choice(vs) if vs else None
            case "pi":
                a = self.gen_ty(g, ge, d - 1)
                if a is None:
                    return None
                g2, ge2 = self.extend(g, ge, "x", a)
                b = self.gen_ty(g2, ge2, d - 1)
                return None if b is None else Term("Pi", (Arg((), a), Arg(("x",), b)))
            case "fam":
                for i in range(len(g)):
                    prem, t = c.declarative.lookup_var(g, i)
                    pe = c.declarative.lookup_var(ge, i)[0]
                    if len(prem) == 1 and t.const == "Ty" and not prem[0].premises and prem[0].type.const == "Tm":
                        u = self.gen_tm(g, ge, pe[0].type.args[0].body, d - 1)
                        if u is not None:
                            return Term(i, (Arg((), u),), g[len(g) - 1 - i].name)
                return None
            case "eq":
                a = self.gen_ty(g, ge, d - 1)
                if a is None:
                    return None
                t = self.gen_tm(g, ge, a, d - 1)
                u = t if self.rng.random() < 0.5 else self.gen_tm(g, ge, a, d - 1)
                if t is None or u is None:
                    return None
                return Term("Eq", (Arg((), a), Arg((), t), Arg((), u)))
            case "U":
                return Term("U", (Arg((), self.level(g)),))
            case "El":
                lv = self.level(g)
                a = self.gen_tm(g, ge, Term("U", (Arg((), lv),)), d - 1)
                return None if a is None else Term("El", (Arg((), lv), Arg((), a)))
        return None

    def extend(self, g, ge, name: str, a: Term):
        return (
            g + (CtxEntry(name, (), tm_of(self.erase(a))),),
            ge + (CtxEntry(name, (), tm_of(a)),),
        )

    # -- terms -------------------------------------------------------------------

    def gen_tm(self, g, ge, want: Term, d: int) -> Term | None:
        """An elaborated term of type Tm(want), `want` elaborated over g."""
        wn = self.nf(self.erase(want))
        opts = ["var", "var", "intro", "intro"]
        if d > 0:
            redex = ["app"] + (["J"] if self.has_eq else [])
            opts += redex * (3 if self.rng.random() < self.redex_bias else 1)
        self.rng.shuffle(opts)
        for o in opts:
            r = self._tm(o, g, ge, want, wn, d)
            if r is not None:
                return r
        return None

    def _tm(self, o, g, ge, want, wn, d):
        match o:
            case "var":
                vs = self.vars_of_type(g, ge, wn)
                return self.rng.choice(vs) if vs else None
            case "intro":
                return self._intro(g, ge, want, wn, d)
            case "app":
                a = self.gen_ty(g, ge, d - 1)
                if a is None:
                    return None
                cod = shift(want, 1)
                fn = self.gen_tm(g, ge, Term("Pi", (Arg((), a), Arg(("x",), cod))), d - 1)
                u = self.gen_tm(g, ge, a, d - 1)
                if fn is None or u is None:
                    return None
                return Term("App", (Arg((), a), Arg(("x",), cod), Arg((), fn), Arg((), u)))
            case "J":
                return self._j(g, ge, want, d)
        return None

    def _intro(self, g, ge, want, wn, d):
        h = wn.head
        if type(h) is not str:
            return None
        if want.head != h:
            want = self.elab_of(g, wn)
        match h:
            case "Pi" if d > 0 or self.rng.random() < 0.5:
                a, b = want.args[0].body, want.args[1].body
                g2, ge2 = self.extend(g, ge, "x", a)
                body = self.gen_tm(g2, ge2, b, max(d - 1, 0))
                if body is None:
                    return None
                return Term("Lam", (Arg((), a), Arg(("x",), b), Arg(("x",), body)))
            case "Eq":
                a, t, u = (x.body for x in want.args)
                if self.nf(self.erase(t)) != self.nf(self.erase(u)):
                    return None
                return Term("refl", (Arg((), a), Arg((), t)))
            case "U":
                lv = wn.args[0].body
                choices = ["pi"] + (["uu", "Up"] if lv.head == "Succ" else [])
                o = self.rng.choice(choices)
                if o == "uu":
                    return Term("uu", (Arg((), lv.args[0].body),))
                if o == "Up":
                    lower = lv.args[0].body
                    a = self.gen_tm(g, ge, Term("U", (Arg((), lower),)), max(d - 1, 0))
                    return None if a is None else Term("Up", (Arg((), lower), Arg((), a)))
                if d <= 0:
                    return None
                a = self.gen_tm(g, ge, Term("U", (Arg((), lv),)), d - 1)
                if a is None:
                    return None
                g2, ge2 = self.extend(g, ge, "x", Term("El", (Arg((), lv), Arg((), a))))
                b = self.gen_tm(g2, ge2, Term("U", (Arg((), shift(lv, 1)),)), d - 1)
                return None if b is None else Term("pi", (Arg((), lv), Arg((), a), Arg(("x",), b)))
        return None

    def _j(self, g, ge, want, d):
        eqs = []
        for i in range(len(g)):
            prem, t = c.declarative.lookup_var(g, i)
            if not prem and t.const == "Tm" and self.nf(t.args[0].body).head == "Eq":
                _, te = c.declarative.lookup_var(ge, i)
                eqs.append((Term(i, (), g[len(g) - 1 - i].name), te.args[0].body))
        if eqs and self.rng.random() < 0.4:
            ev, eqt = self.rng.choice(eqs)
            if eqt.head != "Eq":
                eqt = self.elab_of(g, self.erase(eqt))
            a, t, u = (x.body for x in eqt.args)
        else:
            a = self.gen_ty(g, ge, d - 1)
            if a is None:
                return None
            t = self.gen_tm(g, ge, a, d - 1)
            if t is None:
                return None
            u, ev = t, Term("refl", (Arg((), a), Arg((), t)))
        p = self.gen_tm(g, ge, want, d - 1)
        if p is None:
            return None
        fam = Arg(("x", "y"), shift(want, 2))
        return Term("J", (Arg((), a), Arg((), t), Arg((), u), Arg((), ev), fam, Arg((), p)))

    # -- samples -------------------------------------------------------------------

    def sample(self, depth: int = 3, tries: int = 20) -> Sample | None:
        oracle = Oracle(self.m.theory(), Fuel(10**6))
        for _ in range(tries):
            target = self.gen_ty(self.g0, self.ge0, 1)
            if target is None:
                continue
            if self.rng.random() < 0.15:
                t = target
                want_type = TypeExpr("Ty")
            else:
                t = self.gen_tm(self.g0, self.ge0, target, depth)
                want_type = tm_of(self.erase(target))
            if t is None:
                continue
            try:
                oracle.check(self.g0, t, want_type)
            except ComplfError:
                continue
            return Sample(self.g0, t, want_type)
        return None


# ---------------------------------------------------------------------------
# Elaborated rewrite rules and the elaborated mirror of a strategy step


@dataclass(frozen=True)
class ElabRule:
    surface_index: int  # position of the surface rule in the theory
    ctx: tuple  # elaborated context of the rule variables; extra ones first
    extra: int  # number of variables absent from the surface rule
    lhs: Term
    rhs: Term
    type: TypeExpr


ELABORATED_RULES = {
    "lambda_pi": [
        (0, "A : Ty, B : (x : Tm(A)) -> Ty, t : (x : Tm(A)) -> Tm(B(x)), u : Tm(A)", 2,
         "App(A, x. B(x), Lam(A, x. B(x), x. t(x)), u)", "t(u)", "Tm(B(u))"),
    ],
    "equality": [
        (0, "A : Ty, B : (x : Tm(A)) -> Ty, t : (x : Tm(A)) -> Tm(B(x)), u : Tm(A)", 2,
         "App(A, x. B(x), Lam(A, x. B(x), x. t(x)), u)", "t(u)", "Tm(B(u))"),
        (1, "A : Ty, t : Tm(A), P : (x : Tm(A), y : Tm(Eq(A, t, x))) -> Ty, p : Tm(P(t, refl(A, t)))", 2,
         "J(A, t, t, refl(A, t), x y. P(x, y), p)", "p", "Tm(P(t, refl(A, t)))"),
    ],
    "universes": [
        (0, "A : Ty, B : (x : Tm(A)) -> Ty, t : (x : Tm(A)) -> Tm(B(x)), u : Tm(A)", 2,
         "App(A, x. B(x), Lam(A, x. B(x), x. t(x)), u)", "t(u)", "Tm(B(u))"),
        (1, "l : Lvl, a : Tm(U(l)), b : (x : Tm(El(l, a))) -> Tm(U(l))", 1,
         "El(l, pi(l, a, x. b(x)))", "Pi(El(l, a), x. El(l, b(x)))", "Ty"),
        (2, "l : Lvl", 0, "El(Succ(l), uu(l))", "U(l)", "Ty"),
        (3, "l : Lvl, a : Tm(U(l))", 1, "El(Succ(l), Up(l, a))", "El(l, a)", "Ty"),
        (4, "l : Lvl, a : Tm(U(l)), b : (x : Tm(El(l, a))) -> Tm(U(l))", 1,
         "Up(l, pi(l, a, x. b(x)))", "pi(Succ(l), Up(l, a), x. Up(l, b(x)))", "Tm(U(Succ(l)))"),
    ],
}


@lru_cache(maxsize=None)
def elaborated_rules(name: str) -> tuple[ElabRule, ...]:
    m = golden(name)
    full = m.theory().full_presig
    out = []
    for idx, cx, extra, lhs, rhs, t in ELABORATED_RULES[name]:
        g = parse_context(cx, full)
        out.append(ElabRule(idx, g, extra, parse_term(lhs, full, g), parse_term(rhs, full, g), parse_type(t, full, g)))
    return tuple(out)


def check_elaborated_rule(name: str, r: ElabRule) -> list[str]:
    """Problems with a hand-elaborated rule: erasure mismatch or ill-typedness."""
    m = golden(name)
    sig = m.sig
    rule = m.rules[r.surface_index]
    k = len(r.ctx) - r.extra
    problems = []
    for side, e, want in (("lhs", r.lhs, rule.lhs), ("rhs", r.rhs, rule.rhs)):
        er = strengthen(erase_elaborated(sig, e), r.extra, k)
        if er != want:
            problems.append(f"{side} erases to {er!r}, expected {want!r}")
    thy = m.theory()
    o = Oracle(thy, Fuel(10**6))
    try:
        g = o.context_wf((), r.ctx)
        t = o.type_wf(g, r.type)
        o.check(g, r.lhs, t)
        o.check(g, r.rhs, t)
    except ComplfError as e:
        problems.append(f"typing: {e}")
    return problems


def surface_redex(sys: RewriteSystem, t: Term, path=()):
    """Position of the leftmost-outermost redex of t, or None."""
    if sys.root_step(t) is not None:
        return path
    for i, a in enumerate(t.args):
        p = surface_redex(sys, a.body, path + (i,))
        if p is not None:
            return p
    return None


def kept_indices(sig, head) -> list[int]:
    if type(head) is not str:
        return None
    return [i for i, k in enumerate(sig.get(head).nu) if k]


def subterm(t: Term, path) -> Term:
    for i in path:
        t = t.args[i].body
    return t


def replace(t: Term, path, new: Term) -> Term:
    if not path:
        return new
    i = path[0]
    a = t.args[i]
    args = t.args[:i] + (Arg(a.names, replace(a.body, path[1:], new)),) + t.args[i + 1:]
    return Term(t.head, args, t.name)


def elaborated_path(sig, te: Term, surface_path) -> tuple[int, ...]:
    out = []
    cur = te
    for j in surface_path:
        kept = kept_indices(sig, cur.head)
        i = j if kept is None else kept[j]
        out.append(i)
        cur = cur.args[i].body
    return tuple(out)


def _lenient(sig, p: Term, t: Term, r: int, k: int, out: list, names: list, erased: bool) -> bool:
    h = p.head
    if type(h) is int and h >= r:
        pos = k - 1 - (h - r)
        if out[pos] is None:
            out[pos] = Arg(tuple(names[len(names) - r:]) if r else (), t)
        return True
    if t.head != h or len(t.args) != len(p.args):
        return erased
    nu = sig.get(h).nu if type(h) is str else (True,) * len(p.args)
    for pa, ta, kept in zip(p.args, t.args, nu):
        if not _lenient(sig, pa.body, ta.body, r + len(pa.names), k, out, names + list(pa.names), erased or not kept):
            return False
    return True


@lru_cache(maxsize=None)
def _single_rule_systems(name: str):
    m = golden(name)
    return tuple(RewriteSystem(m.presig, [r]) for r in m.rules)


def elaborated_step(name: str, te: Term) -> tuple[Term, Term] | None:
    """Mirror one leftmost-outermost step on an elaborated term.

    Returns (elaborated reduct, surface reduct) or None at a normal form.
    """
    m = golden(name)
    sig = m.sig
    ts = erase_elaborated(sig, te)
    path = surface_redex(m.system, ts)
    if path is None:
        return None
    sub_s = subterm(ts, path)
    fired = next(i for i, s in enumerate(_single_rule_systems(name)) if s.root_step(sub_s) is not None)
    rule = next(r for r in elaborated_rules(name) if r.surface_index == fired)
    epath = elaborated_path(sig, te, path)
    sub_e = subterm(te, epath)
    k = len(rule.ctx)
    out: list = [None] * k
    if not _lenient(sig, rule.lhs, sub_e, 0, k, out, [], False) or any(x is None for x in out):
        raise AssertionError(f"elaborated rule {fired} does not match {sub_e!r}")
    new_e = replace(te, epath, substitute(rule.rhs, out))
    return new_e, m.system.step(ts)


# ---------------------------------------------------------------------------
# Small helpers for matching-completeness


def closed_levels():
    z = Term("Zero")
    s = lambda t: Term("Succ", (Arg((), t),))  # noqa: E731
    return [z, s(z), s(s(z))]


def product(*xs):
    return list(itertools.product(*xs))


__all__ = [
    "GOLDEN",
    "Enumerator",
    "ElabGen",
    "RawGen",
    "Sample",
    "check_elaborated_rule",
    "closed_levels",
    "ctx",
    "elaborated_rules",
    "elaborated_step",
    "golden",
    "is_beta_normal",
    "size",
    "term",
    "theory_file",
    "tm_of",
    "ty",
    "erase_elaborated_context",
    "Theory",
]
