"""Declarative typing over elaborated terms.

An elaborated term is a term over the full pre-signature: every constant
carries its whole premise spine, erased positions included. On such input
every typing rule is syntax-directed once conversion is folded into spine
checking, so this module is a deterministic decision procedure that never
guesses. It is the independent reference for the bidirectional checker.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

from .errors import ComplfError, OracleError
from .report import Report
from .rewriting import Fuel, RewriteRule, RewriteSystem, convertible
from .subst import shift, substitute
from .syntax import (
    Arg,
    Context,
    CtxEntry,
    Signature,
    Term,
    TypeExpr,
    erase_context,
    erase_signature,
    full_presignature,
    scope_problem,
)


class Theory:
    """A signature together with rewrite rules over its erasure."""

    def __init__(self, sig: Signature, rules: Sequence[RewriteRule] = ()):
        self.sig = sig
        self.presig = erase_signature(sig)
        self.full_presig = full_presignature(sig)
        self.rules = RewriteSystem(self.presig, rules).restrict(self.presig)

    def prefix(self, name: str) -> "Theory":
        """The theory of the entries before `name` and the rules over them."""
        sub = self.sig.prefix(name)
        return Theory(sub, self.rules.restrict(erase_signature(sub)).rules)


@dataclass(frozen=True)
class TypingVerdict:
    accepted: bool
    type: TypeExpr | None = None
    failure: str | None = None

    def __bool__(self) -> bool:
        return self.accepted


# ---------------------------------------------------------------------------
# Erasure of elaborated syntax


def erase_elaborated(sig: Signature, t: Term) -> Term:
    args = tuple(Arg(a.names, erase_elaborated(sig, a.body)) for a in t.args)
    if type(t.head) is str:
        e = sig.get(t.head)
        if e is None:
            raise OracleError("Const", f"unknown constant {t.head}")
        if len(args) != len(e.nu):
            raise OracleError("Const", f"{t.head} expects {len(e.nu)} elaborated arguments, got {len(args)}")
        args = tuple(a for a, k in zip(args, e.nu) if k)
    return Term(t.head, args, t.name)


def erase_elaborated_spine(sig: Signature, sp: Sequence[Arg]) -> tuple[Arg, ...]:
    return tuple(Arg(a.names, erase_elaborated(sig, a.body)) for a in sp)


def erase_elaborated_type(sig: Signature, t: TypeExpr) -> TypeExpr:
    e = sig.get(t.const)
    args = erase_elaborated_spine(sig, t.args)
    if e is not None and len(args) == len(e.nu):
        args = tuple(a for a, k in zip(args, e.nu) if k)
    return TypeExpr(t.const, args)


def erase_elaborated_context(sig: Signature, g: Context) -> Context:
    return tuple(
        CtxEntry(e.name, erase_elaborated_context(sig, e.premises), erase_elaborated_type(sig, e.type))
        for e in g
    )


# ---------------------------------------------------------------------------
# The oracle


def lookup_var(g: Context, i: int) -> tuple[Context, TypeExpr]:
    """Premises and type of variable #i, weakened to the whole of g."""
    if i < 0 or i >= len(g):
        raise OracleError("Var", f"variable #{i} is not in the context")
    e = g[len(g) - 1 - i]
    return shift(e.premises, i + 1), shift(e.type, i + 1, len(e.premises))


class Oracle:
    def __init__(self, thy: Theory, fuel: Fuel | None = None):
        self.thy = thy
        self.fuel = fuel or Fuel()

    def conv(self, a, b) -> bool:
        return convertible(self.thy.rules, a, b, self.fuel)

    def synth(self, g: Context, t: Term) -> TypeExpr:
        h = t.head
        if type(h) is int:
            prem, ty = lookup_var(g, h)
            surf = self.spine(g, t.args, prem, "Var")
            return substitute(ty, surf)
        e = self.thy.sig.get(h)
        if e is None:
            raise OracleError("Const", f"unknown constant {h}")
        if e.result is None:
            raise OracleError("Const", f"type-level constant {h} used as a term")
        surf = self.spine(g, t.args, e.premises, "Const")
        return substitute(e.result, surf)

    def spine(self, g: Context, items: Sequence[Arg], d: Context, rule: str) -> list[Arg]:
        """Check the spine against d (over g); return its erasure."""
        if len(items) != len(d):
            raise OracleError(rule, f"spine has {len(items)} items, expected {len(d)}")
        surf: list[Arg] = []
        for j, (a, e) in enumerate(zip(items, d)):
            prem = substitute(e.premises, surf)
            ty = substitute(e.type, surf, len(e.premises))
            if len(a.names) != len(prem):
                raise OracleError("ExtSpine", f"item {j} binds {len(a.names)} variables, expected {len(prem)}")
            self.check(g + prem, a.body, ty, f"ExtSpine[{j}]")
            surf.append(Arg(a.names, erase_elaborated(self.thy.sig, a.body)))
        return surf

    def check(self, g: Context, t: Term, ty: TypeExpr, rule: str = "Conv") -> None:
        got = self.synth(g, t)
        if got.const != ty.const:
            raise OracleError(rule, f"sort mismatch: {got.const} against {ty.const}")
        if not self.conv(got, ty):
            from .surface import print_expr

            raise OracleError(rule, f"type {print_expr(got)} is not convertible to {print_expr(ty)}")

    def type_wf(self, g: Context, t: TypeExpr) -> TypeExpr:
        e = self.thy.sig.get(t.const)
        if e is None:
            raise OracleError("Type", f"unknown constant {t.const}")
        if e.result is not None:
            raise OracleError("Type", f"term-level constant {t.const} used as a type")
        surf = self.spine(g, t.args, e.premises, "Type")
        return TypeExpr(t.const, tuple(a for a, k in zip(surf, e.nu) if k))

    def context_wf(self, g: Context, ext: Context) -> Context:
        """Check g.ext ⊢ where ext is elaborated; return ext's erasure."""
        out: list[CtxEntry] = []
        for e in ext:
            cur = g + tuple(out)
            prem = self.context_wf(cur, e.premises)
            ty = self.type_wf(cur + prem, e.type)
            out.append(CtxEntry(e.name, prem, ty))
        return tuple(out)


def _verdict(fn) -> TypingVerdict:
    try:
        return TypingVerdict(True, fn())
    except ComplfError as e:
        return TypingVerdict(False, None, str(e))
    except RecursionError:
        return TypingVerdict(False, None, "recursion limit reached")


def check_context_wf(thy: Theory, g: Context, fuel: Fuel | None = None) -> TypingVerdict:
    """g is an elaborated context."""
    p = scope_problem(thy.full_presig, (), g)
    if p:
        return TypingVerdict(False, None, f"[Scope] {p}")
    return _verdict(lambda: (Oracle(thy, fuel).context_wf((), g), None)[1])


def check_type_elaborated(thy: Theory, g: Context, t: TypeExpr, fuel: Fuel | None = None) -> TypingVerdict:
    """Γ ⊢ T for surface g and elaborated t; the verdict carries T's erasure."""
    return _verdict(lambda: Oracle(thy, fuel).type_wf(g, t))


def synth_elaborated(thy: Theory, g: Context, t: Term, fuel: Fuel | None = None) -> TypingVerdict:
    """g is a surface context assumed well-formed; t is elaborated."""
    p = scope_problem(thy.full_presig, erase_context(g), t)
    if p:
        return TypingVerdict(False, None, f"[Scope] {p}")
    return _verdict(lambda: Oracle(thy, fuel).synth(g, t))


def check_elaborated(thy: Theory, g: Context, t: Term, ty: TypeExpr, fuel: Fuel | None = None) -> TypingVerdict:
    def run():
        o = Oracle(thy, fuel)
        o.check(g, t, ty)
        return ty

    p = scope_problem(thy.full_presig, erase_context(g), t)
    if p:
        return TypingVerdict(False, None, f"[Scope] {p}")
    return _verdict(run)


def check_spine_elaborated(thy: Theory, g: Context, sp: Sequence[Arg], d: Context, fuel: Fuel | None = None) -> TypingVerdict:
    return _verdict(lambda: (Oracle(thy, fuel).spine(g, sp, d, "Spine"), None)[1])


# ---------------------------------------------------------------------------
# Well-typed theories


Elaborations = Mapping[str, tuple[Context, "TypeExpr | None"]]


def check_signature(thy: Theory, elaborations: Elaborations | None = None, fuel: Fuel | None = None) -> Report:
    """Check each entry in its prefix theory.

    Signature premises may mention constants with erased arguments, which the
    oracle cannot guess; `elaborations` supplies, per entry, elaborated
    premises and result. Entries without one are taken as already elaborated.
    """
    rep = Report()
    elaborations = elaborations or {}
    for e in thy.sig:
        pre = thy.prefix(e.name)
        prem_surface_problem = scope_problem(pre.presig, (), e.premises)
        if prem_surface_problem:
            rep.error(e.name, f"premises: {prem_surface_problem}")
            continue
        if e.result is not None:
            p = scope_problem(pre.presig, erase_context(e.premises), e.result)
            if p:
                rep.error(e.name, f"result: {p}")
                continue
        prem, result = elaborations.get(e.name, (e.premises, e.result))
        o = Oracle(pre, fuel)
        try:
            p = scope_problem(pre.full_presig, (), prem)
            if p:
                raise OracleError("Scope", f"premises need elaboration: {p}")
            if erase_elaborated_context(pre.sig, prem) != e.premises:
                raise OracleError("Scope", "elaborated premises do not erase to the declared ones")
            surf = o.context_wf((), prem)
            if result is not None:
                if erase_elaborated_type(pre.sig, result) != e.result:
                    raise OracleError("Scope", "elaborated result does not erase to the declared one")
                o.type_wf(surf, result)
        except ComplfError as err:
            rep.error(e.name, str(err))
    return rep
