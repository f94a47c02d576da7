"""A logical-framework kernel with erased arguments and generic bidirectional checking."""

from importlib import resources

from .bidirectional import (
    CheckEntry,
    Checker,
    InferAllCheck,
    InferSynth,
    ModeClass,
    ModedTheory,
    TypeLevel,
    check,
    check_spine,
    check_type_wf,
    classify_modes,
    elaborate_signature,
    ill_moded_hint,
    infer,
    validate_moded_signature,
)
from .declarative import (
    Oracle,
    Theory,
    TypingVerdict,
    check_context_wf,
    check_elaborated,
    check_signature,
    erase_elaborated,
    synth_elaborated,
)
from .deep import run_deep
from .errors import (
    ComplfError,
    ConversionFail,
    FuelExhausted,
    MatchFail,
    NoInferRule,
    OracleError,
    ParseError,
    PatternError,
    SpineError,
    TypeCheckError,
)
from .patterns import MatchResult, PatternWitness, RigidityWitness, is_pattern, is_rigid, match_expr
from .rewriting import (
    Fuel,
    RewriteRule,
    RewriteSystem,
    convertible,
    head_normalize,
    lint_left_linear,
    lint_orthogonal,
    normalize,
    strategy_step,
    validate_rule,
)
from .subst import identity_spine, shift, substitute
from .surface import (
    TheoryFile,
    parse_context,
    parse_term,
    parse_theory,
    parse_type,
    print_entry,
    print_expr,
    print_presignature,
    print_rule,
    print_theory,
)
from .syntax import (
    TYPEKIND,
    Arg,
    CtxEntry,
    PreEntry,
    PreSignature,
    ScopeEntry,
    SigEntry,
    Signature,
    Term,
    TypeExpr,
    alpha_eq,
    erase_context,
    erase_context_assigned,
    erase_signature,
    erase_type,
    nu_action,
    scope_check,
)

BUNDLED = ("lambda_pi", "lambda_pi_annotated", "equality", "universes", "category", "arith")


def theory_source(name: str) -> str:
    """Text of a bundled theory file, e.g. theory_source("universes")."""
    return resources.files("complf.theories").joinpath(f"{name}.clf").read_text(encoding="utf-8")


def load_theory(name: str) -> TheoryFile:
    return parse_theory(theory_source(name))
