"""Raw syntax: scopes, pre-signatures, terms, spines, types, contexts, signatures.

Variables are de Bruijn indices counted from the innermost entry of the
ambient scope. Surface names travel along as display hints only, so structural
equality of two expressions is alpha-equivalence.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence, Union

from .errors import ScopeError

TYPEKIND = "□"


# ---------------------------------------------------------------------------
# Scopes and pre-signatures


@dataclass(frozen=True)
class ScopeEntry:
    """x :: δ → s. Equality ignores the name."""

    name: str = field(compare=False)
    scope: tuple["ScopeEntry", ...]
    sort: str

    def __repr__(self) -> str:
        return f"{self.name}::{format_arity(self.scope, self.sort)}"


Scope = tuple[ScopeEntry, ...]


def order(scope: Scope) -> int:
    o = -1
    for e in scope:
        o = max(o, 1 + order(e.scope))
    return o


@dataclass(frozen=True)
class PreEntry:
    name: str
    scope: Scope
    result: str  # a sort, or TYPEKIND for type-level constants

    @property
    def type_level(self) -> bool:
        return self.result == TYPEKIND


class PreSignature:
    """Ordered constant arities, indexed by name."""

    def __init__(self, entries: Iterable[PreEntry] = ()):
        self.entries: tuple[PreEntry, ...] = tuple(entries)
        self._index = {e.name: e for e in self.entries}
        if len(self._index) != len(self.entries):
            raise ScopeError("duplicate constant in pre-signature")

    def get(self, name: str) -> PreEntry | None:
        return self._index.get(name)

    def __contains__(self, name: str) -> bool:
        return name in self._index

    def __iter__(self):
        return iter(self.entries)

    def __len__(self) -> int:
        return len(self.entries)

    def __eq__(self, other) -> bool:
        return isinstance(other, PreSignature) and self.entries == other.entries

    def __hash__(self) -> int:
        return hash(self.entries)

    def __repr__(self) -> str:
        return f"PreSignature({list(self.entries)!r})"


def format_arity(scope: Scope, result: str) -> str:
    if not scope:
        return result
    inner = "".join(f"({e.name} :: {format_arity(e.scope, e.sort)})" for e in scope)
    return f"{inner} → {result}"


# ---------------------------------------------------------------------------
# Terms, spines and types


class Term:
    """h(spine). `head` is an int (de Bruijn index) or a str (constant name).

    `bound` is one more than the largest free index, so substitution can skip
    subterms it cannot touch. `nf` caches a normal form per rewrite system.
    """

    __slots__ = ("head", "args", "name", "bound", "_hash", "nf")

    def __init__(self, head: int | str, args: tuple["Arg", ...] = (), name: str | None = None):
        self.head = head
        self.args = args
        self.name = name
        b = head + 1 if type(head) is int else 0
        hs = [hash(head)]
        for a in args:
            n = len(a.names)
            ab = a.body.bound - n
            if ab > b:
                b = ab
            hs.append(n)
            hs.append(a.body._hash)
        self.bound = b
        self._hash = hash(tuple(hs))
        self.nf = None

    @property
    def is_var(self) -> bool:
        return type(self.head) is int

    def __eq__(self, other) -> bool:
        if self is other:
            return True
        if not isinstance(other, Term):
            return NotImplemented
        return _terms_equal(self, other)

    def __ne__(self, other) -> bool:
        r = self.__eq__(other)
        return r if r is NotImplemented else not r

    def __hash__(self) -> int:
        return self._hash

    def __repr__(self) -> str:
        from .surface import print_expr

        return f"Term<{print_expr(self)}>"


class Arg:
    """A spine item: the names bound by the abstraction and its body."""

    __slots__ = ("names", "body")

    def __init__(self, names: tuple[str, ...], body: Term):
        self.names = tuple(names)
        self.body = body

    def __eq__(self, other) -> bool:
        if self is other:
            return True
        if not isinstance(other, Arg):
            return NotImplemented
        return len(self.names) == len(other.names) and self.body == other.body

    def __hash__(self) -> int:
        return hash((len(self.names), self.body._hash))

    def __repr__(self) -> str:
        return f"Arg({self.names!r}, {self.body!r})"


Spine = tuple[Arg, ...]


def _terms_equal(a: Term, b: Term) -> bool:
    # iterative so deep numerals do not exhaust the C stack
    stack = [(a, b)]
    while stack:
        x, y = stack.pop()
        if x is y:
            continue
        if x._hash != y._hash or x.head != y.head or type(x.head) is not type(y.head):
            return False
        xa, ya = x.args, y.args
        if len(xa) != len(ya):
            return False
        for p, q in zip(xa, ya):
            if len(p.names) != len(q.names):
                return False
            stack.append((p.body, q.body))
    return True


class TypeExpr:
    """c(spine) with c a type-level constant."""

    __slots__ = ("const", "args", "_hash", "nf")

    def __init__(self, const: str, args: Spine = ()):
        self.const = const
        self.args = tuple(args)
        self._hash = hash((const, self.args))
        self.nf = None

    @property
    def bound(self) -> int:
        b = 0
        for a in self.args:
            b = max(b, a.body.bound - len(a.names))
        return b

    def __eq__(self, other) -> bool:
        if self is other:
            return True
        if not isinstance(other, TypeExpr):
            return NotImplemented
        return self.const == other.const and self.args == other.args

    def __hash__(self) -> int:
        return self._hash

    def __repr__(self) -> str:
        from .surface import print_expr

        return f"TypeExpr<{print_expr(self)}>"


def var(index: int, *args: Arg, name: str | None = None) -> Term:
    return Term(index, tuple(args), name)


def const(name: str, *args: Arg) -> Term:
    return Term(name, tuple(args))


def arg(body: Term, *names: str) -> Arg:
    return Arg(tuple(names), body)


# ---------------------------------------------------------------------------
# Contexts and signatures


@dataclass(frozen=True)
class CtxEntry:
    """x : Δ → T. Equality ignores the name."""

    name: str = field(compare=False)
    premises: tuple["CtxEntry", ...]
    type: TypeExpr


Context = tuple[CtxEntry, ...]


@dataclass(frozen=True)
class SigEntry:
    """c : Δ_ν → T, or c : Δ_ν → □ when `result` is None."""

    name: str
    premises: Context
    nu: tuple[bool, ...]  # True = kept, False = erased
    result: TypeExpr | None

    def __post_init__(self):
        if len(self.nu) != len(self.premises):
            raise ScopeError(f"{self.name}: erasure assignment length mismatch")

    @property
    def type_level(self) -> bool:
        return self.result is None

    @property
    def has_erased(self) -> bool:
        return not all(self.nu)


class Signature:
    def __init__(self, entries: Iterable[SigEntry] = ()):
        self.entries: tuple[SigEntry, ...] = tuple(entries)
        self._index = {e.name: e for e in self.entries}
        if len(self._index) != len(self.entries):
            raise ScopeError("duplicate constant in signature")

    def get(self, name: str) -> SigEntry | None:
        return self._index.get(name)

    def __contains__(self, name: str) -> bool:
        return name in self._index

    def __iter__(self):
        return iter(self.entries)

    def __len__(self) -> int:
        return len(self.entries)

    def __eq__(self, other) -> bool:
        return isinstance(other, Signature) and self.entries == other.entries

    def __hash__(self) -> int:
        return hash(self.entries)

    def prefix(self, name: str) -> "Signature":
        """Entries strictly before `name`."""
        out = []
        for e in self.entries:
            if e.name == name:
                break
            out.append(e)
        return Signature(out)


Expression = Union[Term, TypeExpr, Spine, Context]


# ---------------------------------------------------------------------------
# Erasure


def erase_type(t: TypeExpr) -> str:
    return t.const


def erase_context(g: Context) -> Scope:
    return tuple(ScopeEntry(e.name, erase_context(e.premises), e.type.const) for e in g)


def erase_context_assigned(d: Context, nu: Sequence[bool]) -> Scope:
    if len(d) != len(nu):
        raise ScopeError("internal: erasure assignment length mismatch")
    return tuple(
        ScopeEntry(e.name, erase_context(e.premises), e.type.const) for e, k in zip(d, nu) if k
    )


def nu_action(nu: Sequence[bool], sp: Sequence[Arg]) -> Spine:
    if len(nu) != len(sp):
        raise ScopeError("internal: spine length does not match erasure assignment")
    return tuple(a for a, k in zip(sp, nu) if k)


def erase_entry(e: SigEntry) -> PreEntry:
    result = TYPEKIND if e.result is None else e.result.const
    return PreEntry(e.name, erase_context_assigned(e.premises, e.nu), result)


def erase_signature(s: Signature) -> PreSignature:
    return PreSignature(erase_entry(e) for e in s)


def full_presignature(s: Signature) -> PreSignature:
    """Arities of elaborated syntax, where no argument is dropped."""
    return PreSignature(
        PreEntry(e.name, erase_context(e.premises), TYPEKIND if e.result is None else e.result.const)
        for e in s
    )


# ---------------------------------------------------------------------------
# Extrinsic scope checking


def _lookup(scope: Scope, i: int) -> ScopeEntry:
    if i < 0 or i >= len(scope):
        raise ScopeError(f"variable #{i} is not in scope")
    return scope[len(scope) - 1 - i]


def _check_term(ps: PreSignature, scope: Scope, t: Term, sort: str | None) -> str:
    h = t.head
    if type(h) is int:
        e = _lookup(scope, h)
        arity, result = e.scope, e.sort
    else:
        pe = ps.get(h)
        if pe is None:
            raise ScopeError(f"unknown constant {h}")
        if pe.type_level:
            raise ScopeError(f"type-level constant {h} used as a term")
        arity, result = pe.scope, pe.result
    if sort is not None and result != sort:
        raise ScopeError(f"head {t.name or h} has sort {result}, expected {sort}")
    _check_spine(ps, scope, t.args, arity)
    return result


def _check_spine(ps: PreSignature, scope: Scope, sp: Sequence[Arg], against: Scope) -> None:
    if len(sp) != len(against):
        raise ScopeError(f"spine has {len(sp)} items, expected {len(against)}")
    for a, e in zip(sp, against):
        if not isinstance(a, Arg):
            raise ScopeError("spine item is not an abstraction")
        if len(a.names) != len(e.scope):
            raise ScopeError(f"item for {e.name} binds {len(a.names)} variables, expected {len(e.scope)}")
        _check_term(ps, scope + e.scope, a.body, e.sort)


def _check_type(ps: PreSignature, scope: Scope, t: TypeExpr) -> None:
    pe = ps.get(t.const)
    if pe is None:
        raise ScopeError(f"unknown constant {t.const}")
    if not pe.type_level:
        raise ScopeError(f"term-level constant {t.const} used as a type")
    _check_spine(ps, scope, t.args, pe.scope)


def _check_context(ps: PreSignature, scope: Scope, g: Context) -> None:
    names = [e.name for e in g]
    if len(set(names)) != len(names):
        raise ScopeError("context entries must have distinct names")
    cur = scope
    for e in g:
        _check_context(ps, cur, e.premises)
        _check_type(ps, cur + erase_context(e.premises), e.type)
        cur = cur + (ScopeEntry(e.name, erase_context(e.premises), e.type.const),)


def scope_problem(ps: PreSignature, scope: Scope, subject, expected=None) -> str | None:
    """The first scope violation of `subject`, or None if it is well-scoped.

    `expected` is a sort for terms, a scope for spines, TYPEKIND (or None) for
    types and None for contexts.
    """
    try:
        if isinstance(subject, Term):
            _check_term(ps, scope, subject, expected)
        elif isinstance(subject, TypeExpr):
            _check_type(ps, scope, subject)
        elif isinstance(subject, tuple) and (not subject or isinstance(subject[0], Arg)) and isinstance(expected, tuple):
            _check_spine(ps, scope, subject, expected)
        elif isinstance(subject, tuple):
            _check_context(ps, scope, subject)
        else:
            return f"not an expression: {subject!r}"
    except ScopeError as e:
        return str(e)
    return None


def scope_check(ps: PreSignature, scope: Scope, subject, expected=None) -> bool:
    return scope_problem(ps, scope, subject, expected) is None


def alpha_eq(a, b) -> bool:
    return type(a) is type(b) and a == b


def sort_of(ps: PreSignature, scope: Scope, t: Term) -> str:
    if type(t.head) is int:
        return _lookup(scope, t.head).sort
    return ps.get(t.head).result
