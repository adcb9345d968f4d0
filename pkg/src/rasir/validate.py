"""Model-level property checks used by ``rasir validate``."""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from .algebra import RuleAlgebraElement, product
from .dpo import admissible_matches, apply_rule
from .graph import Graph
from .model import ModelFile
from .state import State, evaluate_observable, jump_closure, project, represent


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str = ""


@dataclass
class ValidationReport:
    model: str
    checks: list[CheckResult] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks)

    def text(self) -> str:
        lines = [f"model {self.model}"]
        for c in self.checks:
            lines.append(f"{'PASS' if c.passed else 'FAIL'} {c.name}" + (f": {c.detail}" if c.detail else ""))
        return "\n".join(lines)


def random_graph(m: ModelFile, rng: random.Random, max_vertices: int = 5, max_edges: int = 5) -> Graph:
    sig = m.signature
    n = rng.randint(0, max_vertices)
    colors = tuple(rng.randrange(len(sig.vertex_colors)) for _ in range(n))
    edges = []
    if n and sig.edge_sorts:
        for _ in range(rng.randint(0, max_edges)):
            edges.append((rng.randrange(len(sig.edge_sorts)), rng.randrange(n), rng.randrange(n)))
    return Graph(sig, colors, tuple(edges))


def sample_states(m: ModelFile, n: int, rng: random.Random, max_vertices: int = 5) -> list[Graph]:
    """Small random graphs that avoid the model's forbidden patterns."""
    out = []
    if m.initial_graph is not None and m.initial_graph.n_vertices <= max_vertices:
        out.append(m.initial_graph)
    while len(out) < n:
        g = random_graph(m, rng, max_vertices)
        if m.constraint.forbids(g) is None:
            out.append(g)
    return out


def validate_model(m: ModelFile, seed: int = 0, n_states: int = 8) -> ValidationReport:
    rng = random.Random(seed)
    rep = ValidationReport(m.name)
    states = sample_states(m, n_states, rng)
    h = m.hamiltonian().generator(m.parameters)

    bad = [g.text() for g in states if project(represent(h, State.pure(g))) != 0]
    rep.checks.append(CheckResult("projection annihilates the generator", not bad, "; ".join(bad[:3])))

    bad = []
    for name, r in m.rules.items():
        a = RuleAlgebraElement.of(r)
        o = jump_closure(a)
        for g in states:
            if project(represent(a, State.pure(g))) != evaluate_observable(o, g):
                bad.append(f"{name} on {g.text()}")
    rep.checks.append(CheckResult("jump closure matches projected action", not bad, "; ".join(bad[:3])))

    bad = []
    for name, o in m.observables.items():
        a = o.element()
        for g in states:
            if represent(a, State.pure(g)) != State.pure(g).scale(evaluate_observable(o, g)):
                bad.append(f"{name} on {g.text()}")
    rep.checks.append(CheckResult("observables act diagonally", not bad, "; ".join(bad[:3])))

    bad = []
    names = list(m.rules)
    pairs = [(a, b) for a in names for b in names]
    rng.shuffle(pairs)
    for a_name, b_name in pairs[:6]:
        a = RuleAlgebraElement.of(m.rules[a_name])
        b = RuleAlgebraElement.of(m.rules[b_name])
        ab = product(a, b)
        for g in states[:3]:
            s = State.pure(g)
            if represent(ab, s) != represent(a, represent(b, s)):
                bad.append(f"{a_name}*{b_name} on {g.text()}")
    rep.checks.append(CheckResult("representation respects products", not bad, "; ".join(bad[:3])))

    bad = []
    for name in m.conserved:
        o = m.observables[name]
        for g in states:
            before = evaluate_observable(o, g)
            for rname, r in m.rules.items():
                for mm, _ in admissible_matches(r, g):
                    after = evaluate_observable(o, apply_rule(r, g, mm))
                    if after != before:
                        bad.append(f"{rname} changes {name} from {before} to {after}")
    rep.checks.append(CheckResult("conserved observables stay constant", not bad, "; ".join(bad[:3])))
    return rep

