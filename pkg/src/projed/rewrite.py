"""Rule application under the editor strategy: walk the tree top-down and
left-to-right, try rules in source order, replace the first hit, restart
from the root, repeat to fixpoint.  Fuel bounds the number of replacements
since nothing stops a language definition from looping."""

from __future__ import annotations

from dataclasses import dataclass

from .langdef import LanguageDef, Rule
from .matching import EvalError, eval_expr, match_pattern
from .terms import Compound, Path, Term, term_text
from . import scene


DEFAULT_FUEL = 100_000


@dataclass(frozen=True)
class Fuel:
    max_steps: int = DEFAULT_FUEL

    def __post_init__(self):
        if self.max_steps < 1:
            raise ValueError("fuel must be at least 1")


@dataclass(frozen=True)
class RewriteOutcome:
    result: Term
    steps_used: int
    status: str  # "converged" | "fuel-exhausted"

    @property
    def converged(self):
        return self.status == "converged"


class RewriteError(Exception):
    def __init__(self, rule_index: int, path: Path, cause: Exception):
        super().__init__(f"rule {rule_index + 1} at path {list(path)}: {cause}")
        self.rule_index = rule_index
        self.path = path
        self.cause = cause


class NotNormalForm(Exception):
    def __init__(self, offending: Term, path: Path, detail: str):
        super().__init__(f"not a normal form at path {list(path)}: {detail} (in {term_text(offending)})")
        self.offending = offending
        self.path = path


class FuelExhausted(Exception):
    def __init__(self, outcome: RewriteOutcome):
        super().__init__(f"no fixpoint within {outcome.steps_used} steps")
        self.outcome = outcome


def apply_rules_once(rules, t: Term, d: LanguageDef) -> Term | None:
    """One replacement at the first matching (node, rule) in pre-order, or
    None when nothing matches anywhere."""

    def visit(node: Term, path: Path) -> Term | None:
        for i, rule in enumerate(rules):
            env = match_pattern(rule.pattern, node, {})
            if env is not None:
                try:
                    return eval_expr(rule.body, env, d)
                except EvalError as e:
                    raise RewriteError(i, path, e) from e
        if isinstance(node, Compound):
            for j, child in enumerate(node.children):
                new_child = visit(child, path + (j,))
                if new_child is not None:
                    kids = list(node.children)
                    kids[j] = new_child
                    return Compound(node.functor, node.identity, tuple(kids))
        return None

    return visit(t, ())


def rewrite_fixpoint(rules, t: Term, fuel: Fuel, d: LanguageDef) -> RewriteOutcome:
    steps = 0
    current = t
    while steps < fuel.max_steps:
        replaced = apply_rules_once(rules, current, d)
        if replaced is None:
            return RewriteOutcome(current, steps, "converged")
        current = replaced
        steps += 1
    return RewriteOutcome(current, steps, "fuel-exhausted")


def transform(d: LanguageDef, t: Term, fuel: Fuel = Fuel()) -> RewriteOutcome:
    return rewrite_fixpoint(d.transform_rules, t, fuel, d)


def reduce(d: LanguageDef, t: Term, fuel: Fuel = Fuel()) -> Term:
    """Reduce to concrete syntax; the result must be a valid normal form."""
    outcome = rewrite_fixpoint(d.reduce_rules, t, fuel, d)
    if not outcome.converged:
        raise FuelExhausted(outcome)
    err = scene.check_nf(outcome.result)
    if err is not None:
        offending, path, detail = err
        raise NotNormalForm(offending, path, detail)
    return outcome.result


def is_normal_form(t: Term) -> bool:
    return scene.check_nf(t) is None
