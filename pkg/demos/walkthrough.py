"""Tour of the library API on the bundled theories.

Run with `python3 demos/walkthrough.py`.
"""

import complf as c
from complf.patterns import match_expr
from complf.syntax import erase_context


def section(title):
    print(f"\n== {title}")


lp = c.load_theory("lambda_pi").theory()

section("erased pre-signature of the checked-lambda theory")
print(c.print_presignature(c.erase_signature(lp.sig)), end="")

section("checking recovers erased arguments")
g = c.parse_context("A : Ty", lp)
ty = c.parse_type("Tm(Pi(A, x. A))", lp, g)
elab = c.check(lp, g, c.parse_term("Lam(x. x)", lp, g), ty)
names = [e.name for e in g]
print("elaborated:", c.print_expr(elab, names))
print("oracle:", bool(c.check_elaborated(lp.theory(), g, elab, ty)))

section("a beta-redex is not inferable when Lam only checks")
g = c.parse_context("A : Ty, u : Tm(A)", lp)
redex = c.parse_term("App(Lam(x. x), u)", lp, g)
try:
    c.infer(lp, g, redex)
except c.NoInferRule as e:
    print("NoInferRule:", e)
    print("hint:", c.ill_moded_hint(lp, redex))

annotated = c.load_theory("lambda_pi_annotated").theory()
g = c.parse_context("A : Ty, u : Tm(A)", annotated)
ty, _ = c.infer(annotated, g, c.parse_term("App(Lam(A, x. x), u)", annotated, g))
print("with an annotated Lam it infers:", c.print_expr(ty, [e.name for e in g]))

section("non-linear matching modulo rewriting")
eq = c.load_theory("equality").theory()
w = eq.witness(eq.get("refl"))
scope = erase_context(c.parse_context("B : Ty, a : Tm(B)", eq))
subject = c.parse_type("Tm(Eq(B, App(Lam(x. x), a), App(Lam(y. a), a)))", eq, scope)
found = match_expr(eq.system, w, subject).assignment
print("A :=", c.print_expr(found[0].body, ["B", "a"]), " t :=", c.print_expr(found[1].body, ["B", "a"]))

section("evaluation")
arith = c.load_theory("arith")
m = arith.theory()
nf = c.run_deep(c.normalize, m.system, arith.evals[0].term)
n = 0
while nf.head == "succ":
    n, nf = n + 1, nf.args[0].body
print("fact(eight) is the numeral", n)
