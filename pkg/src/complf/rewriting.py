"""Rewrite rules, the leftmost-outermost strategy, normalization and lints."""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .errors import FuelExhausted
from .report import Report
from .subst import free_vars, substitute
from .syntax import Arg, CtxEntry, PreSignature, Scope, Term, TypeExpr, scope_problem

DEFAULT_FUEL = 10**7


def default_fuel() -> int:
    raw = os.environ.get("COMPLF_FUEL")
    if raw:
        try:
            n = int(raw)
            if n >= 1:
                return n
        except ValueError:
            pass
    return DEFAULT_FUEL


class Fuel:
    """A per-call budget of root contractions."""

    def __init__(self, limit: int | None = None):
        self.limit = default_fuel() if limit is None else limit
        self.used = 0

    def tick(self) -> None:
        self.used += 1
        if self.used > self.limit:
            raise FuelExhausted(self.limit)


@dataclass(frozen=True)
class RewriteRule:
    """γ ⊩ lhs ⟼ rhs :: sort."""

    scope: Scope
    lhs: Term
    rhs: Term
    sort: str
    name: str = field(default="", compare=False)

    def constants(self) -> set[str]:
        return constants_of(self.lhs) | constants_of(self.rhs)


def constants_of(e) -> set[str]:
    out: set[str] = set()
    stack = [e]
    while stack:
        x = stack.pop()
        if isinstance(x, Term):
            if type(x.head) is str:
                out.add(x.head)
            stack.extend(a.body for a in x.args)
        elif isinstance(x, TypeExpr):
            out.add(x.const)
            stack.extend(a.body for a in x.args)
        elif isinstance(x, Arg):
            stack.append(x.body)
        elif isinstance(x, CtxEntry):
            stack.append(x.premises)
            stack.append(x.type)
        else:
            stack.extend(x)
    return out


class RewriteSystem:
    def __init__(self, presig: PreSignature, rules: Iterable[RewriteRule] = ()):
        self.presig = presig
        self.rules: tuple[RewriteRule, ...] = tuple(rules)
        self.by_head: dict[str, list[RewriteRule]] = {}
        for r in self.rules:
            self.by_head.setdefault(r.lhs.head, []).append(r)

    @property
    def heads(self) -> set[str]:
        return set(self.by_head)

    def restrict(self, presig: PreSignature) -> "RewriteSystem":
        """The rules whose constants all belong to `presig`."""
        names = {e.name for e in presig}
        return RewriteSystem(presig, [r for r in self.rules if r.constants() <= names])

    # -- redex discovery -----------------------------------------------------

    def root_step(self, t: Term) -> Term | None:
        rules = self.by_head.get(t.head) if type(t.head) is str else None
        if not rules:
            return None
        for r in rules:
            k = len(r.scope)
            out: list = [None] * k
            if _syn_match(r.lhs, t, 0, k, out, []):
                return substitute(r.rhs, out)
        return None

    def step(self, t: Term) -> Term | None:
        r = self.root_step(t)
        if r is not None:
            return r
        for i, a in enumerate(t.args):
            b = self.step(a.body)
            if b is not None:
                args = t.args[:i] + (Arg(a.names, b),) + t.args[i + 1:]
                return Term(t.head, args, t.name)
        return None

    # -- normalization ---------------------------------------------------------

    def nf_term(self, t: Term, fuel: Fuel) -> Term:
        cached = t.nf
        if cached is not None and cached[0] is self:
            return cached[1]
        orig = t
        rules = self.by_head
        while True:
            h = t.head
            has_rules = type(h) is str and h in rules
            if has_rules:
                r = self.root_step(t)
                if r is not None:
                    fuel.tick()
                    t = r
                    continue
            args = t.args
            new = None
            restarted = False
            for i, a in enumerate(args):
                b = self.nf_term(a.body, fuel)
                if b is a.body:
                    continue
                if new is None:
                    new = list(args)
                new[i] = Arg(a.names, b)
                if has_rules:
                    r = self.root_step(Term(h, tuple(new), t.name))
                    if r is not None:
                        fuel.tick()
                        t = r
                        restarted = True
                        break
            if restarted:
                continue
            if new is not None:
                t = Term(h, tuple(new), t.name)
            break
        t.nf = (self, t)
        orig.nf = (self, t)
        return t

    def nf_spine(self, sp: Sequence[Arg], fuel: Fuel) -> tuple[Arg, ...]:
        return tuple(Arg(a.names, self.nf_term(a.body, fuel)) for a in sp)

    def nf_type(self, t: TypeExpr, fuel: Fuel) -> TypeExpr:
        cached = t.nf
        if cached is not None and cached[0] is self:
            return cached[1]
        out = TypeExpr(t.const, self.nf_spine(t.args, fuel))
        t.nf = (self, out)
        out.nf = (self, out)
        return out


def _syn_match(p: Term, t: Term, r: int, k: int, out: list, names: list) -> bool:
    """Syntactic Miller matching of a rule lhs; `r` is the rigid binder depth."""
    h = p.head
    if type(h) is int:
        if h >= r:
            pos = k - 1 - (h - r)
            prev = out[pos]
            if prev is None:
                out[pos] = Arg(tuple(names[len(names) - r:]) if r else (), t)
                return True
            return prev.body == t
        return t.head == h and _syn_args(p.args, t.args, r, k, out, names)
    if t.head != h:
        return False
    return _syn_args(p.args, t.args, r, k, out, names)


def _syn_args(ps, ts, r, k, out, names) -> bool:
    if len(ps) != len(ts):
        return False
    for pa, ta in zip(ps, ts):
        n = len(pa.names)
        if not _syn_match(pa.body, ta.body, r + n, k, out, names + list(pa.names)):
            return False
    return True


# ---------------------------------------------------------------------------
# Public operations


def validate_rule(presig: PreSignature, r: RewriteRule) -> Report:
    from .patterns import pattern_problem

    rep = Report()
    label = r.name or "rule"
    for side, t in (("lhs", r.lhs), ("rhs", r.rhs)):
        p = scope_problem(presig, r.scope, t, r.sort)
        if p:
            rep.error(label, f"{side} is ill-scoped: {p}")
    if not rep.ok:
        return rep
    if type(r.lhs.head) is not str:
        rep.error(label, "lhs must be headed by a constant")
    k = len(r.scope)
    missing = free_vars(r.rhs) - free_vars(r.lhs)
    for i in sorted(missing):
        rep.error(label, f"rhs variable {r.scope[k - 1 - i].name} does not occur in lhs")
    p = pattern_problem(presig, r.lhs, r.scope, ())
    if p and not missing:
        rep.error(label, f"lhs is not a pattern: {p}")
    return rep


def strategy_step(sys: RewriteSystem, t: Term) -> Term | None:
    return sys.step(t)


def head_normalize(sys: RewriteSystem, t: Term, fuel: Fuel | None = None) -> Term:
    """Step until the head is a variable, a constant heading no rule, or t is normal."""
    fuel = fuel or Fuel()
    while type(t.head) is str and t.head in sys.by_head:
        n = sys.step(t)
        if n is None:
            break
        fuel.tick()
        t = n
    return t


def reduce_to_head(sys: RewriteSystem, t: Term, head: str, fuel: Fuel) -> Term | None:
    """Strategy steps until t is headed by `head`; None when that cannot happen."""
    while t.head != head:
        if type(t.head) is not str or t.head not in sys.by_head:
            return None
        n = sys.step(t)
        if n is None:
            return None
        fuel.tick()
        t = n
    return t


def normalize(sys: RewriteSystem, e, fuel: Fuel | None = None):
    fuel = fuel or Fuel()
    if isinstance(e, Term):
        return sys.nf_term(e, fuel)
    if isinstance(e, TypeExpr):
        return sys.nf_type(e, fuel)
    if isinstance(e, Arg):
        return Arg(e.names, sys.nf_term(e.body, fuel))
    if isinstance(e, tuple) and e and isinstance(e[0], Arg):
        return sys.nf_spine(e, fuel)
    if isinstance(e, tuple):
        return tuple(
            CtxEntry(x.name, normalize(sys, x.premises, fuel), sys.nf_type(x.type, fuel)) for x in e
        )
    raise TypeError(f"not an expression: {e!r}")


def convertible(sys: RewriteSystem, a, b, fuel: Fuel | None = None) -> bool:
    if a == b:
        return True
    fuel = fuel or Fuel()
    return normalize(sys, a, fuel) == normalize(sys, b, fuel)


# ---------------------------------------------------------------------------
# Lints


def _flex_counts(t: Term, r: int, k: int, counts: list) -> None:
    h = t.head
    if type(h) is int and h >= r:
        counts[k - 1 - (h - r)] += 1
        return
    for a in t.args:
        _flex_counts(a.body, r + len(a.names), k, counts)


def lint_left_linear(r: RewriteRule) -> bool:
    counts = [0] * len(r.scope)
    _flex_counts(r.lhs, 0, len(r.scope), counts)
    return all(c <= 1 for c in counts)


def _is_flex(t: Term, depth: int) -> bool:
    return type(t.head) is int and t.head >= depth


def _skeletons_unify(a: Term, da: int, b: Term, db: int) -> bool:
    if _is_flex(a, da) or _is_flex(b, db):
        return True
    if a.head != b.head or len(a.args) != len(b.args):
        return False
    return all(
        _skeletons_unify(x.body, da + len(x.names), y.body, db + len(y.names))
        for x, y in zip(a.args, b.args)
    )


def _rigid_positions(t: Term, depth: int, path: tuple[int, ...] = ()):
    if _is_flex(t, depth):
        return
    if type(t.head) is str:
        yield path, t, depth
    for i, a in enumerate(t.args):
        yield from _rigid_positions(a.body, depth + len(a.names), path + (i,))


@dataclass(frozen=True)
class Overlap:
    outer: str
    inner: str
    path: tuple[int, ...]

    def __str__(self) -> str:
        where = "root" if not self.path else f"position {list(self.path)}"
        return f"{self.inner} overlaps {self.outer} at {where}"


@dataclass
class OrthogonalityReport:
    left_linear: dict[str, bool]
    overlaps: list[Overlap]

    @property
    def orthogonal(self) -> bool:
        return all(self.left_linear.values()) and not self.overlaps


def rule_label(r: RewriteRule, i: int) -> str:
    return r.name or f"rule#{i + 1}"


def lint_orthogonal(sys: RewriteSystem) -> OrthogonalityReport:
    labels = [rule_label(r, i) for i, r in enumerate(sys.rules)]
    linear = {labels[i]: lint_left_linear(r) for i, r in enumerate(sys.rules)}
    overlaps = []
    for i, outer in enumerate(sys.rules):
        for path, sub, depth in _rigid_positions(outer.lhs, 0):
            for j, inner in enumerate(sys.rules):
                if i == j and not path:
                    continue
                if not path and j < i:
                    continue  # root overlaps are symmetric; report each pair once
                if _skeletons_unify(inner.lhs, 0, sub, depth):
                    overlaps.append(Overlap(labels[i], labels[j], path))
    return OrthogonalityReport(linear, overlaps)
