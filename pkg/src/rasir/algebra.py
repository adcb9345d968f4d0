"""Rule algebra: rational linear combinations of rule isomorphism classes."""

from __future__ import annotations

import logging
import os
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator

from .dpo import LinearRule, _iter_rule_matches, compose_rules, trivial_match
from .graph import Graph, embeds, is_connected

log = logging.getLogger(__name__)

DEFAULT_TERM_BUDGET = 100_000


class BudgetExceeded(RuntimeError):
    pass


def term_budget() -> int:
    raw = os.environ.get("RASIR_TERM_BUDGET")
    return int(raw) if raw else DEFAULT_TERM_BUDGET


def _frac(x) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


class RuleAlgebraElement:
    """Finite sum ``Σ c · δ(r)`` keyed by rule isomorphism class."""

    __slots__ = ("terms",)

    def __init__(self, terms: dict | None = None):
        self.terms: dict = {}
        for k, (c, r) in (terms or {}).items():
            c = _frac(c)
            if c:
                self.terms[k] = (c, r)

    @classmethod
    def of(cls, rule: LinearRule, coeff=1) -> "RuleAlgebraElement":
        return cls({rule.key: (_frac(coeff), rule)})

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[object, LinearRule]]) -> "RuleAlgebraElement":
        out = cls()
        for c, r in pairs:
            out._add(r.key, _frac(c), r)
        return out

    @classmethod
    def unit(cls, signature) -> "RuleAlgebraElement":
        return cls.of(LinearRule.trivial(signature))

    def _add(self, key, c: Fraction, r: LinearRule) -> None:
        if key in self.terms:
            c0, r0 = self.terms[key]
            c = c0 + c
            if c:
                self.terms[key] = (c, r0)
            else:
                del self.terms[key]
        elif c:
            self.terms[key] = (c, r)

    def __iter__(self) -> Iterator[tuple[Fraction, LinearRule]]:
        for k in sorted(self.terms, key=repr):
            yield self.terms[k]

    def __len__(self):
        return len(self.terms)

    def __bool__(self):
        return bool(self.terms)

    def coeff(self, rule: LinearRule) -> Fraction:
        return self.terms.get(rule.key, (Fraction(0), None))[0]

    def __add__(self, other: "RuleAlgebraElement") -> "RuleAlgebraElement":
        out = RuleAlgebraElement(dict(self.terms))
        for k, (c, r) in other.terms.items():
            out._add(k, c, r)
        return out

    def __neg__(self):
        return self.scale(-1)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c) -> "RuleAlgebraElement":
        c = _frac(c)
        return RuleAlgebraElement({k: (c * v, r) for k, (v, r) in self.terms.items()})

    def __rmul__(self, c):
        return self.scale(c)

    def __eq__(self, other):
        if not isinstance(other, RuleAlgebraElement):
            return NotImplemented
        return {k: c for k, (c, _) in self.terms.items()} == {k: c for k, (c, _) in other.terms.items()}

    def __hash__(self):
        return hash(frozenset((k, c) for k, (c, _) in self.terms.items()))

    def text(self) -> str:
        if not self.terms:
            return "0"
        lines = []
        for c, r in self:
            lines.append(f"{c} · {r.text()}")
        return "\n".join(lines)

    def __repr__(self):
        return f"RuleAlgebraElement({self.text()!r})"

    def to_json(self) -> list:
        return [{"coeff": str(c), "rule": r.to_json()} for c, r in self]


# products of basis rules are cached by isomorphism class
_PRODUCT_CACHE: dict = {}


def _basis_product(r1: LinearRule, r2: LinearRule, budget: list[int], trivial_only: bool = False):
    key = (r1.key, r2.key, trivial_only)
    hit = _PRODUCT_CACHE.get(key)
    if hit is not None:
        # charge what a fresh computation would, so the budget ignores the cache
        budget[0] -= sum(int(c) for _, c, _ in hit)
        if budget[0] < 0:
            raise BudgetExceeded(f"term budget exceeded composing {r1.text()} with {r2.text()}")
        return hit
    acc: dict = {}
    matches = [trivial_match(r1, r2)] if trivial_only else _iter_rule_matches(r1, r2)
    for mu in matches:
        comp = compose_rules(r1, r2, mu)
        if comp is None:
            continue
        budget[0] -= 1
        if budget[0] < 0:
            raise BudgetExceeded(
                f"term budget exceeded composing {r1.text()} with {r2.text()}"
            )
        k = comp.key
        if k in acc:
            acc[k] = (acc[k][0] + 1, acc[k][1])
        else:
            acc[k] = (1, comp)
    result = tuple((k, Fraction(c), r) for k, (c, r) in acc.items())
    _PRODUCT_CACHE[key] = result
    return result


def product(a: RuleAlgebraElement, b: RuleAlgebraElement, budget: int | None = None) -> RuleAlgebraElement:
    """Bilinear rule-algebra product ``a ∗ b`` (b acts first)."""
    left = [budget if budget is not None else term_budget()]
    out = RuleAlgebraElement()
    for ca, ra in a.terms.values():
        for cb, rb in b.terms.values():
            if ra.signature != rb.signature:
                raise ValueError("elements do not share a signature")
            for k, n, r in _basis_product(ra, rb, left):
                out._add(k, ca * cb * n, r)
    return out


def commutator(a: RuleAlgebraElement, b: RuleAlgebraElement, budget: int | None = None) -> RuleAlgebraElement:
    return product(a, b, budget) - product(b, a, budget)


def superposition(a: RuleAlgebraElement, b: RuleAlgebraElement) -> RuleAlgebraElement:
    """Bilinear extension of composition along the trivial match only."""
    left = [term_budget()]
    out = RuleAlgebraElement()
    for ca, ra in a.terms.values():
        for cb, rb in b.terms.values():
            for k, n, r in _basis_product(ra, rb, left, trivial_only=True):
                out._add(k, ca * cb * n, r)
    return out


@dataclass(frozen=True)
class ConstraintSet:
    """Connected patterns that never occur in reachable states."""

    forbidden_patterns: tuple[Graph, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "forbidden_patterns", tuple(self.forbidden_patterns))
        for p in self.forbidden_patterns:
            if not is_connected(p):
                raise ValueError("forbidden patterns must be connected and non-empty")

    def forbids(self, g: Graph) -> Graph | None:
        for p in self.forbidden_patterns:
            if p.signature == g.signature and embeds(p, g):
                return p
        return None


@dataclass
class AuditEntry:
    coeff: Fraction
    rule: LinearRule
    pattern: Graph

    def text(self) -> str:
        return f"dropped {self.coeff} · {self.rule.text()} (input contains {self.pattern.text()})"


@dataclass
class AuditLog:
    entries: list[AuditEntry] = field(default_factory=list)

    def record(self, entry: AuditEntry) -> None:
        self.entries.append(entry)
        log.debug(entry.text())


def reduce(a: RuleAlgebraElement, s: ConstraintSet | None, audit: AuditLog | None = None) -> RuleAlgebraElement:
    """Drop every term whose input graph contains a forbidden pattern."""
    if s is None or not s.forbidden_patterns:
        return a
    kept = {}
    for k, (c, r) in a.terms.items():
        bad = s.forbids(r.input)
        if bad is None:
            kept[k] = (c, r)
        elif audit is not None:
            audit.record(AuditEntry(c, r, bad))
        else:
            log.debug("dropped %s · %s", c, r.text())
    return RuleAlgebraElement(kept)
