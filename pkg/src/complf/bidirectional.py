"""Moded theories and the generic bidirectional checker.

Each constant declares how its erased arguments are recovered: either from
the type it is checked against (`CheckEntry`) or from the inferred type of one
designated argument (`InferSynth`). The checker returns elaborated terms so
that every acceptance can be replayed through the declarative oracle.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Sequence, Union

from .declarative import Oracle, Theory, lookup_var
from .errors import ComplfError, ConversionFail, MatchFail, NoInferRule, SpineError, TypeCheckError
from .patterns import PatternWitness, is_pattern, pattern_problem, rigidity, match_expr
from .report import Report
from .rewriting import Fuel, RewriteRule, RewriteSystem, normalize
from .subst import shift, strengthen, substitute
from .syntax import (
    Arg,
    Context,
    CtxEntry,
    SigEntry,
    Signature,
    Term,
    TypeExpr,
    erase_context,
    erase_signature,
)


# ---------------------------------------------------------------------------
# Moded entries


@dataclass(frozen=True)
class TypeLevel:
    name: str
    premises: Context

    def underlying(self) -> SigEntry:
        return SigEntry(self.name, self.premises, (True,) * len(self.premises), None)


@dataclass(frozen=True)
class InferAllCheck:
    name: str
    premises: Context
    result: TypeExpr

    def underlying(self) -> SigEntry:
        return SigEntry(self.name, self.premises, (True,) * len(self.premises), self.result)


@dataclass(frozen=True)
class CheckEntry:
    """c⁻ : {Δ′}Δ → T with T a rigid pattern over |Δ′|."""

    name: str
    erased: Context
    premises: Context  # over |erased|
    result: TypeExpr  # over |erased|

    def underlying(self) -> SigEntry:
        nu = (False,) * len(self.erased) + (True,) * len(self.premises)
        return SigEntry(self.name, self.erased + self.premises, nu, shift(self.result, len(self.premises)))


@dataclass(frozen=True)
class InferSynth:
    """c⁺ : Δ₁{Δ′}(x : Γₓ → T)⁺Δ₂ → U."""

    name: str
    before: Context
    erased: Context  # over |before|
    synth_name: str
    synth_ctx: Context  # over |before|
    synth_type: TypeExpr  # over |before|.|erased|.|synth_ctx|
    after: Context  # over |before|.|erased|.x
    result: TypeExpr  # over the whole telescope

    def telescope(self) -> Context:
        x = CtxEntry(self.synth_name, shift(self.synth_ctx, len(self.erased)), self.synth_type)
        return self.before + self.erased + (x,) + self.after

    def underlying(self) -> SigEntry:
        nu = (True,) * len(self.before) + (False,) * len(self.erased) + (True,) + (True,) * len(self.after)
        return SigEntry(self.name, self.telescope(), nu, self.result)


ModedEntry = Union[TypeLevel, InferAllCheck, CheckEntry, InferSynth]


def moded_entry(name: str, mode: str | None, premises: Context, marks: Sequence[str], result: TypeExpr | None) -> ModedEntry:
    """Build a moded entry from a full telescope.

    `marks` has one of "check", "erased", "synth" per premise. Raises
    TypeCheckError when the marks do not fit any entry shape.
    """
    n_erased = sum(1 for m in marks if m == "erased")
    synth = [i for i, m in enumerate(marks) if m == "synth"]
    if result is None:
        if n_erased or synth:
            raise TypeCheckError(f"{name}: type-level constants take only checked premises")
        return TypeLevel(name, premises)
    if mode is None:
        if n_erased:
            raise TypeCheckError(f"{name}: a symbol with erased premises needs an explicit mode")
        mode = "+"
    if mode == "-":
        if synth:
            raise TypeCheckError(f"{name}: checking-mode symbols have no synthesized premise")
        if any(m == "erased" for m in marks[n_erased:]):
            raise TypeCheckError(f"{name}: erased premises must come first in a checking-mode symbol")
        return CheckEntry(name, premises[:n_erased], premises[n_erased:], strengthen_result(name, result, len(premises) - n_erased))
    if not n_erased:
        if synth:
            raise TypeCheckError(f"{name}: a synthesized premise only makes sense with erased premises")
        return InferAllCheck(name, premises, result)
    if len(synth) != 1:
        raise TypeCheckError(f"{name}: an inferring symbol with erased premises needs exactly one '+' premise")
    s = synth[0]
    first = marks.index("erased")
    if any(m != "check" for m in marks[:first]) or any(m != "erased" for m in marks[first:s]) or any(m != "check" for m in marks[s + 1:]):
        raise TypeCheckError(f"{name}: premises must read Δ₁ {{Δ′}} (x : Γ → T)+ Δ₂")
    before, erased, x, after = premises[:first], premises[first:s], premises[s], premises[s + 1:]
    gx = strengthen(x.premises, len(erased))
    if gx is None:
        raise TypeCheckError(f"{name}: the context of {x.name} mentions an erased premise")
    return InferSynth(name, before, erased, x.name, gx, x.type, after, result)


def strengthen_result(name: str, result: TypeExpr, k: int) -> TypeExpr:
    r = strengthen(result, k)
    if r is None:
        raise TypeCheckError(f"{name}: the result type of a checking-mode symbol may mention only erased premises")
    return r


class ModeClass(enum.Enum):
    INFERABLE = "inferable"
    CHECKABLE_ONLY = "checkable-only"
    ILL_MODED = "ill-moded"

    @property
    def well_moded(self) -> bool:
        return self is not ModeClass.ILL_MODED


class ModedTheory:
    def __init__(self, entries: Sequence[ModedEntry], rules: Sequence[RewriteRule] = ()):
        self.entries: tuple[ModedEntry, ...] = tuple(entries)
        self.sig = Signature(e.underlying() for e in self.entries)
        self.presig = erase_signature(self.sig)
        self.system = RewriteSystem(self.presig, rules)
        self._index = {e.name: e for e in self.entries}
        self._theory: Theory | None = None
        self._witness: dict[str, PatternWitness | None] = {}

    @property
    def rules(self) -> tuple[RewriteRule, ...]:
        return self.system.rules

    def get(self, name: str) -> ModedEntry | None:
        return self._index.get(name)

    def theory(self) -> Theory:
        if self._theory is None:
            self._theory = Theory(self.sig, self.rules)
        return self._theory

    def prefix(self, name: str) -> "ModedTheory":
        out = []
        for e in self.entries:
            if e.name == name:
                break
            out.append(e)
        sub = ModedTheory(out)
        return ModedTheory(out, self.system.restrict(sub.presig).rules)

    def witness(self, entry: CheckEntry | InferSynth) -> PatternWitness | None:
        if entry.name not in self._witness:
            self._witness[entry.name] = _entry_pattern(self.presig, entry)
        return self._witness[entry.name]

    def extend(self, entries: Sequence[ModedEntry] = (), rules: Sequence[RewriteRule] = ()) -> "ModedTheory":
        return ModedTheory(self.entries + tuple(entries), self.rules + tuple(rules))


def _entry_pattern(presig, entry) -> PatternWitness | None:
    match entry:
        case CheckEntry(erased=erased, result=result):
            return is_pattern(presig, result, erase_context(erased), ())
        case InferSynth(erased=erased, synth_ctx=gx, synth_type=ty):
            return is_pattern(presig, ty, erase_context(erased), erase_context(gx))
    return None


def _entry_pattern_problem(presig, entry) -> str | None:
    match entry:
        case CheckEntry(erased=erased, result=result):
            return pattern_problem(presig, result, erase_context(erased), ())
        case InferSynth(erased=erased, synth_ctx=gx, synth_type=ty):
            return pattern_problem(presig, ty, erase_context(erased), erase_context(gx))
    return None


# ---------------------------------------------------------------------------
# The algorithm


class Checker:
    """Bidirectional checking in a moded theory.

    With `elaborate` on, recovered erased arguments are themselves elaborated
    (checked against their premise types, falling back to their normal form
    when the recovered term is not well-moded) so the output is a complete
    elaborated term. With it off, recovered arguments are stored as found and
    the checker runs the plain infer/check algorithm.
    """

    def __init__(self, mthy: ModedTheory, fuel: Fuel | None = None, elaborate: bool = True):
        self.mthy = mthy
        self.sys = mthy.system
        self.fuel = fuel or Fuel()
        self.elaborate = elaborate

    def _entry(self, name: str) -> ModedEntry:
        e = self.mthy.get(name)
        if e is None:
            raise TypeCheckError(f"unknown constant {name}")
        return e

    def _witness(self, e) -> PatternWitness:
        w = self.mthy.witness(e)
        if w is None:
            raise TypeCheckError(f"{e.name}: declared type is not a pattern")
        return w

    # -- inference -----------------------------------------------------------

    def infer(self, g: Context, t: Term) -> tuple[TypeExpr, Term]:
        h = t.head
        if type(h) is int:
            prem, ty = lookup_var(g, h)
            el, surf = self.spine(g, t.args, prem)
            return substitute(ty, surf), Term(h, tuple(el), t.name)
        e = self._entry(h)
        match e:
            case InferAllCheck(premises=prem, result=res):
                el, surf = self.spine(g, t.args, prem)
                return substitute(res, surf), Term(h, tuple(el))
            case InferSynth():
                return self._infer_synth(g, t, e)
            case CheckEntry():
                raise NoInferRule(f"cannot infer a type for {h}: it is a checking-only constant")
            case TypeLevel():
                raise TypeCheckError(f"type-level constant {h} used as a term")
        raise TypeCheckError(f"unsupported entry for {h}")

    def _infer_synth(self, g: Context, t: Term, e: InferSynth) -> tuple[TypeExpr, Term]:
        n1, n2 = len(e.before), len(e.after)
        if len(t.args) != n1 + 1 + n2:
            raise SpineError(f"{e.name} takes {n1 + 1 + n2} arguments, got {len(t.args)}")
        el1, s1 = self.spine(g, t.args[:n1], e.before)
        gx = substitute(e.synth_ctx, s1)
        sa = t.args[n1]
        if len(sa.names) != len(gx):
            raise SpineError(f"binds {len(sa.names)} variables, expected {len(gx)}", n1)
        v_ty, el_x = self.infer(g + gx, sa.body)
        found = match_expr(self.sys, self._witness(e), v_ty, self.fuel).assignment
        payload = list(s1) + list(found) + [Arg(sa.names, sa.body)]
        el2, s2 = self.spine(g, t.args[n1 + 1:], substitute(e.after, payload), offset=n1 + 1)
        ty = substitute(e.result, payload + list(s2))
        el_v = self.recovered(g, found, substitute(e.erased, s1))
        return ty, Term(e.name, tuple(el1) + tuple(el_v) + (Arg(sa.names, el_x),) + tuple(el2))

    # -- checking ------------------------------------------------------------

    def check(self, g: Context, t: Term, ty: TypeExpr) -> Term:
        h = t.head
        if type(h) is str:
            e = self.mthy.get(h)
            if isinstance(e, CheckEntry):
                found = match_expr(self.sys, self._witness(e), ty, self.fuel).assignment
                el, _ = self.spine(g, t.args, substitute(e.premises, found))
                el_v = self.recovered(g, found, e.erased)
                return Term(h, tuple(el_v) + tuple(el))
        got, el = self.infer(g, t)
        if got == ty:
            return el
        if got.const != ty.const:
            raise ConversionFail(f"expected a {ty.const}, got a {got.const}", ty, got)
        a = normalize(self.sys, ty, self.fuel)
        b = normalize(self.sys, got, self.fuel)
        if a != b:
            from .surface import print_expr

            names = [x.name for x in g]
            raise ConversionFail(
                f"type mismatch: expected {print_expr(a, names)}, got {print_expr(b, names)}", a, b
            )
        return el

    def spine(self, g: Context, items: Sequence[Arg], d: Context, offset: int = 0) -> tuple[list[Arg], list[Arg]]:
        if len(items) != len(d):
            raise SpineError(f"expected {len(d)} arguments, got {len(items)}")
        el: list[Arg] = []
        surf: list[Arg] = []
        for j, (a, e) in enumerate(zip(items, d)):
            prem = substitute(e.premises, surf)
            ty = substitute(e.type, surf, len(e.premises))
            if len(a.names) != len(prem):
                raise SpineError(f"binds {len(a.names)} variables, expected {len(prem)}", offset + j)
            el.append(Arg(a.names, self.check(g + prem, a.body, ty)))
            surf.append(a)
        return el, surf

    def recovered(self, g: Context, found: Sequence[Arg], d: Context) -> list[Arg]:
        if not self.elaborate:
            return list(found)
        out = []
        for j, (v, e) in enumerate(zip(found, d)):
            prem = substitute(e.premises, found[:j])
            ty = substitute(e.type, found[:j], len(e.premises))
            try:
                body = self.check(g + prem, v.body, ty)
            except (TypeCheckError, MatchFail):
                body = self.check(g + prem, normalize(self.sys, v.body, self.fuel), ty)
            out.append(Arg(v.names, body))
        return out

    def type_wf(self, g: Context, ty: TypeExpr) -> TypeExpr:
        e = self.mthy.get(ty.const)
        if not isinstance(e, TypeLevel):
            raise TypeCheckError(f"{ty.const} is not a type constant")
        el, _ = self.spine(g, ty.args, e.premises)
        return TypeExpr(ty.const, tuple(el))

    def context(self, g: Context, ext: Context) -> Context:
        """Elaborate the extension ext of g, checking each entry's type."""
        out = []
        for i, e in enumerate(ext):
            cur = g + ext[:i]
            prem = self.context(cur, e.premises)
            ty = self.type_wf(cur + e.premises, e.type)
            out.append(CtxEntry(e.name, prem, ty))
        return tuple(out)


def infer(mthy: ModedTheory, g: Context, t: Term, fuel: Fuel | None = None) -> tuple[TypeExpr, Term]:
    return Checker(mthy, fuel).infer(g, t)


def check(mthy: ModedTheory, g: Context, t: Term, ty: TypeExpr, fuel: Fuel | None = None) -> Term:
    return Checker(mthy, fuel).check(g, t, ty)


def check_type_wf(mthy: ModedTheory, g: Context, ty: TypeExpr, fuel: Fuel | None = None) -> TypeExpr:
    return Checker(mthy, fuel).type_wf(g, ty)


def check_spine(mthy: ModedTheory, g: Context, sp: Sequence[Arg], d: Context, fuel: Fuel | None = None) -> list[Arg]:
    return Checker(mthy, fuel).spine(g, sp, d)[0]


def elaborate_context(mthy: ModedTheory, g: Context, fuel: Fuel | None = None) -> Context:
    return Checker(mthy, fuel).context((), g)


# ---------------------------------------------------------------------------
# Validation


def _validate_entry(mthy: ModedTheory, e: ModedEntry, rep: Report, fuel: Fuel | None):
    """Check one entry in its prefix theory; return its elaboration or None."""
    pre = mthy.prefix(e.name)
    ck = Checker(pre, fuel)
    oracle = Oracle(pre.theory(), ck.fuel)
    u = e.underlying()
    try:
        prem = ck.context((), u.premises)
        oracle.context_wf((), prem)
        res = None
        if u.result is not None:
            res = ck.type_wf(u.premises, u.result)
            oracle.type_wf(u.premises, res)
        match e:
            case CheckEntry(erased=erased, result=result):
                ck.type_wf(erased, result)
            case InferSynth(before=before, synth_ctx=gx):
                ck.context((), before + gx)
    except ComplfError as err:
        rep.error(e.name, str(err))
        return None
    if isinstance(e, (CheckEntry, InferSynth)):
        what = "result type" if isinstance(e, CheckEntry) else f"type of {e.synth_name}"
        problem = _entry_pattern_problem(mthy.presig, e)
        if problem:
            rep.error(e.name, f"{what} is not a pattern: {problem}")
            return None
        w = rigidity(mthy.system, mthy.sig, mthy.witness(e))
        for c in w.h1_violations:
            rep.error(e.name, f"{what} is not rigid: {c} heads a rewrite rule")
        for c in w.h2_violations:
            rep.error(e.name, f"{what} is not rigid: {c} has erased arguments")
    return prem, res


def validate_moded_signature(mthy: ModedTheory, fuel: Fuel | None = None) -> Report:
    rep = Report()
    for e in mthy.entries:
        _validate_entry(mthy, e, rep, fuel)
    return rep


def elaborate_signature(mthy: ModedTheory, fuel: Fuel | None = None) -> tuple[dict, Report]:
    """Elaborations of every entry, in the form check_signature expects."""
    rep = Report()
    out = {}
    for e in mthy.entries:
        r = _validate_entry(mthy, e, rep, fuel)
        if r is not None:
            out[e.name] = r
    return out, rep


# ---------------------------------------------------------------------------
# Well-moded terms


def classify_modes(mthy: ModedTheory, t: Term) -> ModeClass:
    return _classify(mthy, t)


def _spine_ok(mthy, sp) -> bool:
    return all(_classify(mthy, a.body).well_moded for a in sp)


def _classify(mthy: ModedTheory, t: Term) -> ModeClass:
    h = t.head
    if type(h) is int:
        return ModeClass.INFERABLE if _spine_ok(mthy, t.args) else ModeClass.ILL_MODED
    e = mthy.get(h)
    match e:
        case InferAllCheck():
            return ModeClass.INFERABLE if _spine_ok(mthy, t.args) else ModeClass.ILL_MODED
        case CheckEntry():
            return ModeClass.CHECKABLE_ONLY if _spine_ok(mthy, t.args) else ModeClass.ILL_MODED
        case InferSynth(before=before, after=after):
            n1 = len(before)
            if len(t.args) != n1 + 1 + len(after):
                return ModeClass.ILL_MODED
            ok = (
                _spine_ok(mthy, t.args[:n1])
                and _spine_ok(mthy, t.args[n1 + 1:])
                and _classify(mthy, t.args[n1].body) is ModeClass.INFERABLE
            )
            return ModeClass.INFERABLE if ok else ModeClass.ILL_MODED
    return ModeClass.ILL_MODED


def classify_type(mthy: ModedTheory, t: TypeExpr) -> bool:
    return isinstance(mthy.get(t.const), TypeLevel) and _spine_ok(mthy, t.args)


def ill_moded_hint(mthy: ModedTheory, t: Term) -> str | None:
    """Name the checking-only constant sitting where an inferable term is needed."""
    h = t.head
    if type(h) is str:
        e = mthy.get(h)
        if isinstance(e, InferSynth):
            n1 = len(e.before)
            if len(t.args) == n1 + 1 + len(e.after):
                s = t.args[n1].body
                if _classify(mthy, s) is ModeClass.CHECKABLE_ONLY:
                    return (
                        f"argument {e.synth_name} of {h} must be inferable, but {s.head} is checking-only; "
                        "the term may still be well-typed"
                    )
    for a in t.args:
        hint = ill_moded_hint(mthy, a.body)
        if hint:
            return hint
    return None
