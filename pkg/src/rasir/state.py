"""Graph states, the canonical representation, observables and jump closure."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator, Sequence

import sympy

from .algebra import (
    BudgetExceeded,
    ConstraintSet,
    RuleAlgebraElement,
    _frac,
    _iter_rule_matches,
    term_budget,
)
from .dpo import LinearRule, admissible_matches, apply_rule, compose_rules
from .graph import Graph, Morphism, component_vertex_sets, count_monos, graph_from_json


class State:
    """Formal sum ``Σ w · |X⟩`` keyed by graph isomorphism class."""

    __slots__ = ("terms",)

    def __init__(self, terms: dict | None = None):
        self.terms: dict = {}
        for k, (w, g) in (terms or {}).items():
            if w:
                self.terms[k] = (w, g)

    @classmethod
    def pure(cls, g: Graph) -> "State":
        return cls({g.key: (Fraction(1), g)})

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[object, Graph]]) -> "State":
        s = cls()
        for w, g in pairs:
            s._add(g.key, w, g)
        return s

    def _add(self, key, w, g) -> None:
        if key in self.terms:
            w0, g0 = self.terms[key]
            w = w0 + w
            if w:
                self.terms[key] = (w, g0)
            else:
                del self.terms[key]
        elif w:
            self.terms[key] = (w, g)

    def __iter__(self) -> Iterator[tuple[object, Graph]]:
        return iter(self.terms.values())

    def __len__(self):
        return len(self.terms)

    def weight(self, g: Graph):
        return self.terms.get(g.key, (0, None))[0]

    def __add__(self, other):
        out = State(dict(self.terms))
        for k, (w, g) in other.terms.items():
            out._add(k, w, g)
        return out

    def scale(self, c) -> "State":
        return State({k: (c * w, g) for k, (w, g) in self.terms.items()})

    def __sub__(self, other):
        return self + other.scale(-1)

    def __eq__(self, other):
        if not isinstance(other, State):
            return NotImplemented
        return {k: w for k, (w, _) in self.terms.items()} == {k: w for k, (w, _) in other.terms.items()}

    def __repr__(self):
        inner = " + ".join(f"{w}|{g.text()}⟩" for w, g in self) or "0"
        return f"State({inner})"


def represent(a: RuleAlgebraElement, s: State, budget: int | None = None) -> State:
    """Canonical representation ``ρ(a)|s⟩``."""
    left = budget if budget is not None else term_budget()
    out = State()
    for c, r in a.terms.values():
        for w, g in s:
            # isolated host vertices of one colour are interchangeable, so
            # matches differing only in which of them they use give
            # isomorphic results; rewrite one representative per class
            isolated = [not inc for inc in g.incident]
            classes: dict = {}
            for m, mult in admissible_matches(r, g):
                left -= 1
                if left < 0:
                    raise BudgetExceeded("term budget exceeded in canonical representation")
                k = tuple(-1 - g.colors[x] if isolated[x] else x for x in m.vmap)
                if k in classes:
                    classes[k][1] += mult
                else:
                    classes[k] = [m, mult]
            for m, mult in classes.values():
                res = apply_rule(r, g, m)
                out._add(res.key, c * w * mult, res)
    return out


def project(s: State):
    """``⟨|s⟩``: the sum of all weights."""
    return sum((w for w, _ in s), Fraction(0))


# --------------------------------------------------------------------------
# observables

@dataclass(frozen=True)
class ObservableTerm:
    coeff: Fraction
    rule: LinearRule  # diagonal rule P <- K -> P

    @property
    def pattern(self) -> Graph:
        return self.rule.input

    @property
    def core(self) -> Graph:
        return self.rule.context

    @property
    def embed(self) -> Morphism:
        return self.rule.i_embed

    @property
    def connected(self) -> bool:
        return len(component_vertex_sets(self.pattern)) == 1


@dataclass
class Observable:
    """Rational combination of pattern-counting observables."""

    combo: list[ObservableTerm] = field(default_factory=list)
    name: str = ""

    @classmethod
    def single(cls, pattern: Graph, core_vertices=(), core_edges=(), coeff=1, name: str = ""):
        r = LinearRule.from_subgraph(pattern, core_vertices, core_edges)
        return cls([ObservableTerm(_frac(coeff), r)], name)

    @classmethod
    def from_element(cls, a: RuleAlgebraElement, name: str = "") -> "Observable":
        return cls([ObservableTerm(c, r) for c, r in a], name)

    def element(self) -> RuleAlgebraElement:
        """The observable as a rule-algebra element of diagonal rules."""
        return RuleAlgebraElement.from_pairs((t.coeff, t.rule) for t in self.combo)

    def __add__(self, other: "Observable") -> "Observable":
        return Observable.from_element(self.element() + other.element())

    def __sub__(self, other: "Observable") -> "Observable":
        return Observable.from_element(self.element() - other.element())

    def scale(self, c) -> "Observable":
        return Observable.from_element(self.element().scale(c), self.name)

    def to_json(self) -> dict:
        terms = []
        for t in self.combo:
            g = t.pattern
            vid = [f"v{i}" for i in range(g.n_vertices)]
            eid = [f"e{i}" for i in range(g.n_edges)]
            terms.append({
                "coeff": str(t.coeff),
                "pattern": g.to_json(vid, eid),
                "core_vertices": [vid[v] for v in t.embed.vmap],
                "core_edges": [eid[e] for e in t.embed.emap],
            })
        return {"name": self.name, "terms": terms}


def observable_from_json(data: dict, signature) -> Observable:
    terms = []
    for t in data.get("terms", []):
        g, vi, ei = graph_from_json(t["pattern"], signature)
        for v in t.get("core_vertices", []):
            if v not in vi:
                raise ValueError(f"observable {data.get('name')!r}: unknown core vertex {v!r}")
        for e in t.get("core_edges", []):
            if e not in ei:
                raise ValueError(f"observable {data.get('name')!r}: unknown core edge {e!r}")
        r = LinearRule.from_subgraph(g, [vi[v] for v in t.get("core_vertices", [])], [ei[e] for e in t.get("core_edges", [])])
        terms.append(ObservableTerm(Fraction(t.get("coeff", "1")), r))
    return Observable(terms, data.get("name", ""))


def count_admissible(rule: LinearRule, x: Graph) -> int:
    """Number of admissible matches of the rule's input in ``x``."""
    return count_monos(rule.input, x, rule.deleted_vertices)


def evaluate_observable(obs: Observable, x: Graph) -> Fraction:
    return sum((t.coeff * count_admissible(t.rule, x) for t in obs.combo), Fraction(0))


def jump_closure(a: RuleAlgebraElement) -> Observable:
    """Replace every term's output leg by its input leg."""
    return Observable.from_element(RuleAlgebraElement.from_pairs((c, r.jump_closed()) for c, r in a))


# --------------------------------------------------------------------------
# Hamiltonians

@dataclass
class JumpTerm:
    rate: sympy.Expr
    element: RuleAlgebraElement
    name: str = ""


@dataclass
class Hamiltonian:
    jump_terms: list[JumpTerm]
    constraint: ConstraintSet = field(default_factory=ConstraintSet)

    def element(self, values: dict | None = None) -> RuleAlgebraElement:
        """``h = Σ κ_j h_j`` with numeric rates (rationalised)."""
        out = RuleAlgebraElement()
        for j in self.jump_terms:
            out = out + j.element.scale(_rate_value(j.rate, values))
        return out

    def generator(self, values: dict | None = None) -> RuleAlgebraElement:
        """``h − 𝕆(h)``: represents the full infinitesimal generator."""
        h = self.element(values)
        return h - jump_closure(h).element()


def _rate_value(rate, values) -> Fraction:
    v = sympy.sympify(rate)
    if values:
        v = v.subs({sympy.Symbol(k, positive=True): val for k, val in values.items()})
    if not v.is_number:
        raise ValueError(f"rate {rate} has unresolved parameters")
    return Fraction(str(sympy.nsimplify(v, rational=True)))


def build_hamiltonian(rules: Sequence, constraint: ConstraintSet | None = None) -> Hamiltonian:
    """Package ``(rate, rule-or-element[, name])`` entries into a Hamiltonian."""
    terms = []
    for entry in rules:
        rate, what = entry[0], entry[1]
        name = entry[2] if len(entry) > 2 else ""
        rate = sympy.sympify(rate)
        if rate.is_number and not rate > 0:
            raise ValueError(f"rate of {name or 'jump term'} must be positive, got {rate}")
        if rate.is_positive is False:
            raise ValueError(f"rate of {name or 'jump term'} must be positive")
        elem = what if isinstance(what, RuleAlgebraElement) else RuleAlgebraElement.of(what)
        terms.append(JumpTerm(rate, elem, name or getattr(what, "name", "")))
    return Hamiltonian(terms, constraint or ConstraintSet())


# --------------------------------------------------------------------------
# connected decomposition

def stirling1(k: int, m: int) -> int:
    """Signed Stirling numbers of the first kind."""
    row = [1]  # s1(0, .)
    for j in range(k):
        new = [0] * (len(row) + 1)
        for i, v in enumerate(row):
            new[i + 1] += v
            new[i] -= j * v
        row = new
    return row[m] if 0 <= m < len(row) else 0


class DecompositionError(RuntimeError):
    pass


@dataclass
class Decomposition:
    """Polynomial in connected observables.

    ``basis`` lists the connected observables in order; ``symbols`` are the
    matching sympy symbols used in ``poly``.
    """

    poly: sympy.Expr
    basis: list[Observable]
    symbols: list[sympy.Symbol]
    keys: list

    def evaluate(self, x: Graph) -> Fraction:
        subs = {s: sympy.Rational(str(evaluate_observable(o, x))) for s, o in zip(self.symbols, self.basis)}
        val = sympy.Rational(self.poly.subs(subs))
        return Fraction(int(val.p), int(val.q))


class _Decomposer:
    def __init__(self, constraint: ConstraintSet | None, max_depth: int = 64):
        self.constraint = constraint
        self.max_depth = max_depth
        self.memo: dict = {}
        self.basis: dict = {}  # key -> (symbol, rule)

    def symbol(self, r: LinearRule) -> sympy.Symbol:
        k = r.key
        if k not in self.basis:
            self.basis[k] = (sympy.Symbol(f"_b{len(self.basis)}"), r)
        return self.basis[k][0]

    def rule(self, r: LinearRule, depth: int = 0) -> sympy.Expr:
        r = observable_normal_form(r)
        if depth > self.max_depth:
            raise DecompositionError(f"decomposition did not terminate at pattern {r.input.text()}")
        k = r.key
        if k in self.memo:
            return self.memo[k]
        comps = component_vertex_sets(r.input)
        if not comps:
            val = sympy.Integer(1)
        elif len(comps) == 1:
            val = self.symbol(r)
        else:
            parts = [_restrict(r, vs) for vs in comps]
            order = sorted(range(len(parts)), key=lambda i: (len(comps[i]), repr(parts[i].key)))
            first = parts[order[0]]
            rest_vs = sorted(v for i in order[1:] for v in comps[i])
            rest = _restrict(r, rest_vs)
            val = self.symbol(first) * self.rule(rest, depth + 1)
            for mu in _iter_rule_matches(first, rest):
                if mu.is_trivial():
                    continue
                comp = compose_rules(first, rest, mu)
                if comp is None:
                    continue
                comp = comp.jump_closed()
                if self.constraint is not None and self.constraint.forbids(comp.input) is not None:
                    continue
                val -= self.rule(comp, depth + 1)
            val = sympy.expand(val)
        self.memo[k] = val
        return val

    def finish(self, expr) -> Decomposition:
        items = sorted(self.basis.items(), key=lambda kv: (kv[1][1].input.n_vertices, repr(kv[0])))
        used = expr.free_symbols
        symbols, basis, keys, rename = [], [], [], {}
        for i, (k, (sym, r)) in enumerate(item for item in items if item[1][0] in used):
            new = sympy.Symbol(f"c{i}")
            rename[sym] = new
            symbols.append(new)
            basis.append(Observable([ObservableTerm(Fraction(1), r)], f"c{i}"))
            keys.append(k)
        return Decomposition(sympy.expand(expr.xreplace(rename)), basis, symbols, keys)


def observable_normal_form(r: LinearRule) -> LinearRule:
    """Representative diagonal rule with the same counting function.

    Edges are never subject to the dangling condition, so every pattern edge
    between core vertices can join the core.  Without edge sorts no vertex can
    dangle either, and the whole pattern becomes core.
    """
    p = r.input
    core = set(r.i_embed.vmap)
    if not p.signature.edge_sorts:
        core = set(range(p.n_vertices))
    edges = [e for e, (_, u, v) in enumerate(p.edges) if u in core and v in core]
    return LinearRule.from_subgraph(p, sorted(core), edges)


def _restrict(r: LinearRule, vertices: Sequence[int]) -> LinearRule:
    """Diagonal rule on the sub-pattern spanned by ``vertices``."""
    p = r.input
    vs = set(vertices)
    edges = [e for e, (_, u, v) in enumerate(p.edges) if u in vs]
    core_v = [v for v in r.i_embed.vmap if v in vs]
    core_e = [e for e in r.i_embed.emap if p.edges[e][1] in vs]
    sub, incl = p.subgraph(sorted(vs), edges)
    vpos = {v: i for i, v in enumerate(incl.vmap)}
    epos = {e: i for i, e in enumerate(incl.emap)}
    return LinearRule.from_subgraph(sub, [vpos[v] for v in core_v], [epos[e] for e in core_e])


def connected_decomposition(obs: Observable, constraint: ConstraintSet | None = None) -> Decomposition:
    """Write ``obs`` as a polynomial in connected observables."""
    d = _Decomposer(constraint)
    expr = sympy.Integer(0)
    for t in obs.combo:
        expr += sympy.Rational(t.coeff.numerator, t.coeff.denominator) * d.rule(t.rule)
    return d.finish(sympy.expand(expr))
