"""projed: a projectional editing engine driven by declarative language
definitions (abstract-syntax clauses plus pattern-directed transform and
reduce rules)."""

from importlib import resources

from .langdef import (
    Diagnostic,
    LangError,
    LanguageDef,
    instantiate_clause,
    load_language,
    load_language_file,
    parse_language,
    term_from_source,
    validate_language,
)
from .matching import EvalError, enumerate_splits, eval_expr, match_pattern
from .rewrite import Fuel, FuelExhausted, NotNormalForm, RewriteOutcome, is_normal_form, reduce, transform
from .scene import LayoutCache, Scene, hit_test, layout, measure_text, render_svg, render_text, validate_nf
from .session import (
    DoubleClick,
    DragNode,
    EdgeDrag,
    EditText,
    Event,
    KeyPressed,
    MenuSelected,
    NewEdge,
    Session,
    dispatch,
    expand_hole,
    hole_options,
    new_session,
)
from .terms import (
    Atom,
    Compound,
    Hole,
    Identity,
    Term,
    fresh_identity,
    make_compound,
    structurally_equal,
)
from .persist import load_session, load_term, save_session, save_term


def bundled_language_path(name: str):
    """Path to one of the language definitions shipped with the package."""
    return resources.files(__package__) / "languages" / f"{name}.pld"


__all__ = [name for name in dir() if not name.startswith("_")]
