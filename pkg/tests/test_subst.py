import random

from hypothesis import given, settings
from hypothesis import strategies as st

from complf.subst import free_vars, identity_spine, shift, strengthen, substitute
from complf.syntax import Arg, ScopeEntry, Term, scope_check, var
from support import RawGen, golden

LVL = ScopeEntry("z", (), "Lvl")


def test_hereditary_example():
    # x(y)[(z. Succ(z))/x, Zero/y] = Succ(Zero)
    e = var(1, Arg((), var(0)))
    payload = (Arg(("z",), Term("Succ", (Arg((), var(0)),))), Arg((), Term("Zero")))
    assert substitute(e, payload) == Term("Succ", (Arg((), Term("Zero")),))


def test_substitution_under_binders():
    # Lam(y. x) with x := c, where x is the outer variable
    e = Term("Lam", (Arg(("y",), var(1)),))
    assert substitute(e, (Arg((), Term("c")),)) == Term("Lam", (Arg(("y",), Term("c")),))


def test_depth_leaves_inner_variables_alone():
    # over (x).(y): replace x, keep y
    e = Term("App", (Arg((), var(1)), Arg((), var(0))))
    out = substitute(e, (Arg((), Term("c")),), 1)
    assert out == Term("App", (Arg((), Term("c")), Arg((), var(0))))


def test_shift_and_strengthen():
    e = Term("App", (Arg((), var(0)), Arg((), var(2))))
    s = shift(e, 3, 1)
    assert s == Term("App", (Arg((), var(0)), Arg((), var(5))))
    assert strengthen(s, 3, 1) == e
    assert strengthen(e, 1) is None
    assert free_vars(e) == {0, 2}


def test_identity_spine_is_eta_long():
    g = (ScopeEntry("f", (LVL,), "Lvl"), LVL)
    ids = identity_spine(g)
    assert ids[1] == Arg((), var(0))
    assert ids[0] == Arg(("z",), var(2, Arg((), var(0))))


@settings(max_examples=300, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_commutation_property(seed):
    m = golden("universes")
    rng = random.Random(seed)
    gen = RawGen(m.presig, rng)
    g1, g2, g3 = gen.scope(rng.randrange(0, 3), "a"), gen.scope(rng.randrange(1, 3), "b"), gen.scope(rng.randrange(0, 2), "c")
    sort = rng.choice(gen.sorts)
    e = gen.term(g1 + g2 + g3, sort, 4)
    ts, us = gen.spine(g1 + g2, g3, 2), gen.spine(g1, g2, 2)
    if None in (e, ts, us):
        return
    lhs = substitute(substitute(e, ts), us)
    assert lhs == substitute(substitute(e, us, len(g3)), substitute(ts, us))
    assert scope_check(m.presig, g1, lhs, sort)
    assert substitute(identity_spine(g2), us) == us


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_shift_strengthen_roundtrip(seed):
    m = golden("universes")
    rng = random.Random(seed)
    gen = RawGen(m.presig, rng)
    g = gen.scope(rng.randrange(0, 4), "a")
    e = gen.term(g, rng.choice(gen.sorts), 5)
    if e is None:
        return
    k, cut = rng.randrange(0, 3), rng.randrange(0, len(g) + 1)
    assert strengthen(shift(e, k, cut), k, cut) == e
