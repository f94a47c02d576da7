"""Hereditary substitution, weakening and identity spines.

Every operation is an instance of one traversal, `_term(t, c, k, payload, s)`:
below the cutoff `c` variables are untouched, the next `k` indices are
replaced by `payload` (a spine over the result's outer scope), and indices
past them are lowered by `k` and raised by `s`. Substituting into a variable
head re-enters the traversal on the payload body, which is what keeps terms
in canonical form.
"""

from __future__ import annotations

from typing import Sequence

from .syntax import Arg, CtxEntry, Context, Scope, Term, TypeExpr


def _term(t: Term, c: int, k: int, payload: Sequence[Arg], s: int) -> Term:
    if t.bound <= c:
        return t
    h = t.head
    if type(h) is int and c <= h < c + k:
        item = payload[k - 1 - (h - c)]
        new_args = _spine(t.args, c, k, payload, s)
        return _term(item.body, 0, len(item.names), new_args, c)
    args = _spine(t.args, c, k, payload, s)
    if type(h) is int and h >= c + k:
        return Term(h - k + s, args, t.name)
    if args is t.args:
        return t
    return Term(h, args, t.name)


def _spine(sp: tuple[Arg, ...], c: int, k: int, payload: Sequence[Arg], s: int) -> tuple[Arg, ...]:
    out = None
    for i, a in enumerate(sp):
        b = _term(a.body, c + len(a.names), k, payload, s)
        if b is not a.body:
            if out is None:
                out = list(sp[:i])
            out.append(Arg(a.names, b))
        elif out is not None:
            out.append(a)
    return sp if out is None else tuple(out)


def _type(t: TypeExpr, c: int, k: int, payload: Sequence[Arg], s: int) -> TypeExpr:
    args = _spine(t.args, c, k, payload, s)
    return t if args is t.args else TypeExpr(t.const, args)


def _context(g: Context, c: int, k: int, payload: Sequence[Arg], s: int) -> Context:
    out = []
    for i, e in enumerate(g):
        prem = _context(e.premises, c + i, k, payload, s)
        ty = _type(e.type, c + i + len(e.premises), k, payload, s)
        out.append(e if (prem is e.premises and ty is e.type) else CtxEntry(e.name, prem, ty))
    return tuple(out)


def _apply(e, c: int, k: int, payload: Sequence[Arg], s: int):
    if k == 0 and s == 0:
        return e
    if isinstance(e, Term):
        return _term(e, c, k, payload, s)
    if isinstance(e, TypeExpr):
        return _type(e, c, k, payload, s)
    if isinstance(e, tuple) and e and isinstance(e[0], Arg):
        return _spine(e, c, k, payload, s)
    if isinstance(e, tuple):
        return _context(e, c, k, payload, s)
    raise TypeError(f"not an expression: {e!r}")


def substitute(e, payload: Sequence[Arg], depth: int = 0):
    """e over γ₁.γ₂.γ₃ with |γ₃| = depth; replace γ₂ (len(payload) entries,
    outermost first) by `payload`, a spine over γ₁. Result is over γ₁.γ₃."""
    payload = tuple(payload)
    return _apply(e, depth, len(payload), payload, 0)


def shift(e, amount: int, cutoff: int = 0):
    """Weaken e by inserting `amount` variables below the innermost `cutoff` ones."""
    if amount < 0:
        raise ValueError("use strengthen to remove variables")
    return _apply(e, cutoff, 0, (), amount)


def free_vars(e, depth: int = 0) -> set[int]:
    """Free de Bruijn indices of e, relative to its own scope (below `depth` ignored)."""
    out: set[int] = set()

    def go_term(t: Term, c: int) -> None:
        if t.bound <= c:
            return
        if type(t.head) is int and t.head >= c:
            out.add(t.head - c)
        for a in t.args:
            go_term(a.body, c + len(a.names))

    def go(x, c):
        if isinstance(x, Term):
            go_term(x, c)
        elif isinstance(x, TypeExpr):
            for a in x.args:
                go_term(a.body, c + len(a.names))
        elif isinstance(x, Arg):
            go_term(x.body, c + len(x.names))
        else:
            for i, item in enumerate(x):
                if isinstance(item, CtxEntry):
                    go(item.premises, c + i)
                    go(item.type, c + i + len(item.premises))
                else:
                    go(item, c)

    go(e, depth)
    return out


def strengthen(e, k: int, depth: int = 0):
    """Drop the k variables just outside the innermost `depth`; None if e uses them."""
    fv = free_vars(e)
    if any(depth <= i < depth + k for i in fv):
        return None
    dummy = tuple(Arg((), Term("__unused__")) for _ in range(k))
    return _apply(e, depth, k, dummy, 0)


def identity_spine(g: Scope) -> tuple[Arg, ...]:
    n = len(g)
    out = []
    for j, entry in enumerate(g):
        m = len(entry.scope)
        body = Term(n - 1 - j + m, identity_spine(entry.scope), entry.name)
        out.append(Arg(tuple(e.name for e in entry.scope), body))
    return tuple(out)
