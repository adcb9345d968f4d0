"""Self-describing JSON model files."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from pathlib import Path

import sympy

from .algebra import ConstraintSet, RuleAlgebraElement
from .dpo import LinearRule, rule_from_json
from .graph import ColorSignature, Graph, graph_from_json, is_connected
from .moments import Identity
from .state import Hamiltonian, JumpTerm, Observable, evaluate_observable, observable_from_json

SCHEMA = "rasir-model/1"
BUNDLED = ("birth-death", "hw", "voter", "voter-flip", "tmt")


class ModelError(ValueError):
    def __init__(self, errors: list[str]):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


@dataclass
class ModelFile:
    name: str
    signature: ColorSignature
    parameters: dict[str, float]
    rules: dict[str, LinearRule]
    jump_terms: list[JumpTerm]
    observables: dict[str, Observable]
    observable_sets: dict[str, list[str]] = field(default_factory=dict)
    identities: list[Identity] = field(default_factory=list)
    constraint: ConstraintSet = field(default_factory=ConstraintSet)
    conserved: list[str] = field(default_factory=list)
    initial_graph: Graph | None = None
    initial_counts: dict[str, int] | None = None
    source: str = ""

    def hamiltonian(self) -> Hamiltonian:
        return Hamiltonian(list(self.jump_terms), self.constraint)

    def select(self, names: list[str] | None) -> list[Observable]:
        """Observables by name; a single observable-set name expands to its members."""
        if not names:
            names = self.observable_sets.get("default", list(self.observables))
        if len(names) == 1 and names[0] in self.observable_sets:
            names = self.observable_sets[names[0]]
        missing = [n for n in names if n not in self.observables]
        if missing:
            raise ModelError([f"unknown observable {n!r}" for n in missing])
        return [self.observables[n] for n in names]

    def element(self, name: str) -> RuleAlgebraElement:
        if name in self.rules:
            return RuleAlgebraElement.of(self.rules[name])
        for j in self.jump_terms:
            if j.name == name:
                return j.element
        if name in self.observables:
            return self.observables[name].element()
        raise ModelError([f"unknown rule or observable {name!r}"])

    def frozen_values(self, selected: list[str] | None = None) -> dict:
        """Values of the conserved observables on the pure initial state."""
        if self.initial_graph is None:
            raise ModelError(["freezing conserved observables needs an initial graph"])
        skip = set(selected or ())
        return {
            n: (self.observables[n], evaluate_observable(self.observables[n], self.initial_graph))
            for n in self.conserved
            if n not in skip
        }

    def initial_observable_values(self, names: list[str]) -> list[Fraction]:
        if self.initial_graph is not None:
            return [evaluate_observable(self.observables[n], self.initial_graph) for n in names]
        if self.initial_counts is not None:
            return [Fraction(self.initial_counts.get(n, 0)) for n in names]
        raise ModelError(["model has no initial state"])


def bundled_path(name: str) -> Path:
    return Path(str(resources.files("rasir") / "models" / f"{name}.json"))


def resolve_model_path(ref: str) -> Path:
    p = Path(ref)
    if p.exists():
        return p
    if ref in BUNDLED:
        return bundled_path(ref)
    raise ModelError([f"model file {ref!r} not found (bundled models: {', '.join(BUNDLED)})"])


def _rate(expr, params, errors, where):
    symbols = {p: sympy.Symbol(p, positive=True) for p in params}
    try:
        val = sympy.sympify(str(expr), locals=symbols)
    except (sympy.SympifyError, SyntaxError, TypeError) as exc:
        errors.append(f"{where}: cannot parse rate {expr!r} ({exc})")
        return None
    if not isinstance(val, sympy.Expr):
        errors.append(f"{where}: rate {expr!r} is not an arithmetic expression of the parameters")
        return None
    unknown = {s.name for s in val.free_symbols} - set(params)
    if unknown:
        errors.append(f"{where}: rate refers to unknown parameter(s) {', '.join(sorted(unknown))}")
        return None
    num = val.subs({symbols[p]: v for p, v in params.items()})
    if not (num.is_number and num > 0):
        errors.append(f"{where}: rate {expr!r} does not evaluate positive")
        return None
    return val


def load_model(path) -> ModelFile:
    path = resolve_model_path(str(path))
    text = path.read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelError([f"{path}: parse error at line {exc.lineno}, column {exc.colno}: {exc.msg}"]) from None
    return model_from_dict(data, str(path))


def model_from_dict(data: dict, source: str = "") -> ModelFile:
    errors: list[str] = []
    if data.get("$schema") != SCHEMA:
        errors.append(f"$schema must be {SCHEMA!r}")
    try:
        sig = ColorSignature.from_json(data["signature"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ModelError(errors + [f"invalid signature: {exc}"]) from None
    params = {}
    for k, v in data.get("parameters", {}).items():
        try:
            params[k] = float(Fraction(str(v)))
        except ValueError:
            errors.append(f"parameter {k!r}: not a number")

    rules: dict[str, LinearRule] = {}
    jump_terms: list[JumpTerm] = []
    for i, rd in enumerate(data.get("rules", [])):
        name = rd.get("name") or f"rule{i}"
        try:
            r = rule_from_json(rd, sig)
        except (KeyError, ValueError) as exc:
            errors.append(f"rule {name!r}: {exc}")
            continue
        rules[name] = r
        if "rate" in rd:
            rate = _rate(rd["rate"], params, errors, f"rule {name!r}")
            if rate is not None:
                jump_terms.append(JumpTerm(rate, RuleAlgebraElement.of(r), name))
    for jd in data.get("jump_terms", []):
        name = jd.get("name", "")
        elem = RuleAlgebraElement()
        for t in jd.get("terms", []):
            if t["rule"] not in rules:
                errors.append(f"jump term {name!r}: unknown rule {t['rule']!r}")
                continue
            elem = elem + RuleAlgebraElement.of(rules[t["rule"]], Fraction(str(t.get("coeff", "1"))))
        rate = _rate(jd.get("rate"), params, errors, f"jump term {name!r}")
        if rate is not None and elem:
            jump_terms.append(JumpTerm(rate, elem, name))

    observables: dict[str, Observable] = {}
    for od in data.get("observables", []):
        try:
            o = observable_from_json(od, sig)
        except (KeyError, ValueError) as exc:
            errors.append(f"observable {od.get('name')!r}: {exc}")
            continue
        observables[o.name] = o
    for od in data.get("derived_observables", []):
        acc = RuleAlgebraElement()
        for t in od.get("terms", []):
            if t["observable"] not in observables:
                errors.append(f"observable {od.get('name')!r}: unknown observable {t['observable']!r}")
                continue
            acc = acc + observables[t["observable"]].element().scale(Fraction(str(t.get("coeff", "1"))))
        observables[od["name"]] = Observable.from_element(acc, od["name"])

    sets = {}
    for k, members in data.get("observable_sets", {}).items():
        for m in members:
            if m not in observables:
                errors.append(f"observable set {k!r}: unknown observable {m!r}")
        sets[k] = list(members)

    identities = []
    for i, idd in enumerate(data.get("observable_identities", [])):
        terms = []
        for t in idd.get("terms", []):
            if t["observable"] not in observables:
                errors.append(f"identity {i}: unknown observable {t['observable']!r}")
                continue
            terms.append((Fraction(str(t.get("coeff", "1"))), observables[t["observable"]]))
        identities.append(Identity(terms))

    patterns = []
    for i, gd in enumerate(data.get("forbidden_patterns", [])):
        try:
            g = graph_from_json(gd, sig)[0]
        except (KeyError, ValueError) as exc:
            errors.append(f"forbidden pattern {i}: {exc}")
            continue
        if not is_connected(g):
            errors.append(f"forbidden pattern {i}: must be connected and non-empty")
            continue
        patterns.append(g)

    conserved = list(data.get("conserved", []))
    for n in conserved:
        if n not in observables:
            errors.append(f"conserved: unknown observable {n!r}")

    init_graph, init_counts = None, None
    init = data.get("initial_state")
    if init is not None:
        if "graph" in init:
            try:
                init_graph = graph_from_json(init["graph"], sig)[0]
            except (KeyError, ValueError) as exc:
                errors.append(f"initial state: {exc}")
        elif "counts" in init:
            init_counts = {k: int(v) for k, v in init["counts"].items()}
        else:
            errors.append("initial state needs 'graph' or 'counts'")

    if errors:
        raise ModelError(errors)
    return ModelFile(
        data.get("name", ""), sig, params, rules, jump_terms, observables, sets, identities,
        ConstraintSet(tuple(patterns)), conserved, init_graph, init_counts, source,
    )
