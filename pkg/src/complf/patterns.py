"""Miller patterns, rigidity and matching modulo rewriting.

A pattern lives over flex.rigid: flexible variables are the indices just
outside the rigid block, and each occurrence must be applied to exactly the
identity spine of the rigid scope in force at that point.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import MatchFail, PatternError
from .rewriting import Fuel, RewriteSystem, normalize, reduce_to_head
from .subst import identity_spine
from .syntax import Arg, PreSignature, Scope, Signature, Term, TypeExpr


@dataclass(frozen=True)
class PatternWitness:
    subject: Term | TypeExpr
    flex: Scope
    rigid: Scope
    occurrences: tuple[int, ...]
    constants: frozenset[str]

    @property
    def linear(self) -> bool:
        return all(n == 1 for n in self.occurrences)


@dataclass(frozen=True)
class RigidityWitness:
    pattern: PatternWitness
    h1_violations: tuple[str, ...]
    h2_violations: tuple[str, ...]

    @property
    def h1_ok(self) -> bool:
        return not self.h1_violations

    @property
    def h2_ok(self) -> bool:
        return not self.h2_violations


@dataclass(frozen=True)
class MatchResult:
    assignment: tuple[Arg, ...]


def _pat_term(ps, t: Term, flex: Scope, rigid: Scope, path, occ, consts) -> None:
    h = t.head
    r = len(rigid)
    if type(h) is str:
        entry = ps.get(h)
        if entry is None:
            raise PatternError(f"unknown constant {h}", path)
        consts.add(h)
        _pat_spine(ps, t.args, entry.scope, flex, rigid, path, occ, consts)
        return
    if h < r:
        raise PatternError("rigid variable in head position", path)
    fi = h - r
    if fi >= len(flex):
        raise PatternError("variable outside the flexible and rigid scopes", path)
    pos = len(flex) - 1 - fi
    entry = flex[pos]
    if entry.scope != rigid:
        raise PatternError(f"flexible variable {entry.name} must range over the whole rigid scope", path)
    if t.args != identity_spine(rigid):
        raise PatternError(f"flexible variable {entry.name} must be applied to the rigid variables in order", path)
    occ[pos] += 1


def _pat_spine(ps, sp, against: Scope, flex, rigid, path, occ, consts) -> None:
    if len(sp) != len(against):
        raise PatternError("spine length mismatch", path)
    for j, (a, e) in enumerate(zip(sp, against)):
        binders = tuple(e.scope)
        _pat_term(ps, a.body, flex, rigid + binders, path + (j,), occ, consts)


def _pattern(ps: PreSignature, subject, flex: Scope, rigid: Scope) -> PatternWitness:
    occ = [0] * len(flex)
    consts: set[str] = set()
    if isinstance(subject, TypeExpr):
        entry = ps.get(subject.const)
        if entry is None or not entry.type_level:
            raise PatternError(f"{subject.const} is not a type-level constant")
        consts.add(subject.const)
        _pat_spine(ps, subject.args, entry.scope, flex, rigid, (), occ, consts)
    else:
        _pat_term(ps, subject, flex, rigid, (), occ, consts)
    for pos, n in enumerate(occ):
        if n == 0:
            raise PatternError(f"flexible variable {flex[pos].name} does not occur")
    return PatternWitness(subject, tuple(flex), tuple(rigid), tuple(occ), frozenset(consts))


def pattern_problem(ps: PreSignature, subject, flex: Scope, rigid: Scope) -> str | None:
    try:
        _pattern(ps, subject, flex, rigid)
    except PatternError as e:
        return str(e)
    return None


def is_pattern(ps: PreSignature, subject, flex: Scope, rigid: Scope) -> PatternWitness | None:
    try:
        return _pattern(ps, subject, flex, rigid)
    except PatternError:
        return None


def is_rigid(sys: RewriteSystem, sig: Signature, p: PatternWitness) -> RigidityWitness | None:
    w = rigidity(sys, sig, p)
    return w if w.h1_ok and w.h2_ok else None


def rigidity(sys: RewriteSystem, sig: Signature, p: PatternWitness) -> RigidityWitness:
    """Evidence for H1 (no constant heads a rule) and H2 (no erased arguments)."""
    heads = sys.heads
    h1 = tuple(sorted(c for c in p.constants if c in heads))
    h2 = tuple(sorted(c for c in p.constants if sig.get(c) is not None and sig.get(c).has_erased))
    return RigidityWitness(p, h1, h2)


# ---------------------------------------------------------------------------
# Matching modulo rewriting


class _Matcher:
    def __init__(self, sys: RewriteSystem, k: int, rigid_names: list[str], fuel: Fuel):
        self.sys = sys
        self.k = k
        self.names = rigid_names
        self.fuel = fuel
        self.found: list = [None] * k

    def term(self, p: Term, u: Term, r: int, names: list[str], path) -> None:
        h = p.head
        if type(h) is int:
            if h < r:
                raise MatchFail("rigid variable in pattern head", path)
            pos = self.k - 1 - (h - r)
            self.bind(pos, Arg(tuple(names), u), path)
            return
        v = reduce_to_head(self.sys, u, h, self.fuel)
        if v is None:
            got = u.head if type(u.head) is str else "a variable"
            raise MatchFail(f"expected head {h}, got {got}", path)
        self.spine(p.args, v.args, r, names, path)

    def spine(self, ps, us, r, names, path) -> None:
        if len(ps) != len(us):
            raise MatchFail("spine length mismatch", path)
        for j, (pa, ua) in enumerate(zip(ps, us)):
            self.term(pa.body, ua.body, r + len(pa.names), names + list(pa.names), path + (j,))

    def bind(self, pos: int, v: Arg, path) -> None:
        prev = self.found[pos]
        if prev is None:
            self.found[pos] = v
            return
        a = normalize(self.sys, prev, self.fuel)
        b = normalize(self.sys, v, self.fuel)
        if a != b:
            raise MatchFail("non-linear occurrences have different normal forms", path)
        self.found[pos] = a


def match_expr(sys: RewriteSystem, pattern: PatternWitness, subject, fuel: Fuel | None = None) -> MatchResult:
    """Match `pattern` against `subject` modulo the strategy; raise MatchFail.

    The subject lives over ambient.rigid; the assignment is a spine over the
    ambient scope against the flexible scope.
    """
    fuel = fuel or Fuel()
    m = _Matcher(sys, len(pattern.flex), [e.name for e in pattern.rigid], fuel)
    r = len(pattern.rigid)
    names = [e.name for e in pattern.rigid]
    p = pattern.subject
    if isinstance(p, TypeExpr):
        if not isinstance(subject, TypeExpr) or subject.const != p.const:
            got = subject.const if isinstance(subject, TypeExpr) else "a term"
            raise MatchFail(f"expected type {p.const}, got {got}", ())
        m.spine(p.args, subject.args, r, names, ())
    else:
        m.term(p, subject, r, names, ())
    return MatchResult(tuple(m.found))
