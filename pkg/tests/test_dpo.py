import math
import random

import pytest
from hypothesis import given, settings

from brute import SIG, apply_all, isomorphic, random_graph, random_rule, seeds, state_dict
from rasir.dpo import (
    LinearRule,
    admissible_matches,
    apply_rule,
    compose_rules,
    discrete_rule,
    enumerate_rule_matches,
    pullback,
    pushout,
    pushout_complement,
    rule_canonical_form,
    rule_from_json,
    trivial_match,
)
from rasir.graph import ColorSignature, Graph, Morphism, canonical_form, enumerate_monos

X = ColorSignature(("X",), (("e", True),))
V = Graph(X, (0,))
EDGE = Graph(X, (0, 0), ((0, 0, 1),))


def inc(dom, cod, vmap, emap=()):
    return Morphism(dom, cod, tuple(vmap), tuple(emap))


def test_poc_full_deletion():
    xp, _, _ = pushout_complement(inc(Graph(X), V, ()), inc(V, V, (0,)))
    assert xp.is_empty()


def test_poc_dangling_edge():
    assert pushout_complement(inc(Graph(X), V, ()), inc(V, EDGE, (0,))) is None


def test_poc_identity_keeps_host():
    idv = Morphism.identity(V)
    xp, _, _ = pushout_complement(idv, inc(V, EDGE, (1,)))
    assert xp == EDGE


def test_pushout_examples():
    p, _, _ = pushout(Morphism.empty(V), Morphism.empty(EDGE))
    assert sorted(p.colors) == [0, 0, 0] and p.n_edges == 1
    p, _, _ = pushout(Morphism.identity(EDGE), Morphism.identity(EDGE))
    assert p == EDGE
    # two edges glued target-to-source
    p, a, c = pushout(inc(V, EDGE, (1,)), inc(V, EDGE, (0,)))
    path = Graph(X, (0, 0, 0), ((0, 0, 1), (0, 1, 2)))
    assert isomorphic(p, path)
    assert a.is_mono() and c.is_mono() and a.vmap[1] == c.vmap[0]


def test_pushout_universal_property_bruteforce():
    """Every cocone over the span factors uniquely through the pushout."""
    b_to_a, b_to_c = inc(V, EDGE, (1,)), inc(V, EDGE, (0,))
    p, a_p, c_p = pushout(b_to_a, b_to_c)
    host = Graph(X, (0,) * 4, ((0, 0, 1), (0, 1, 2), (0, 2, 3)))
    for fa in enumerate_monos(EDGE, host):
        for fc in enumerate_monos(EDGE, host):
            if fa.vmap[1] != fc.vmap[0]:
                continue
            mediators = []
            for h in enumerate_monos(p, host):
                if a_p.then(h) == fa and c_p.then(h) == fc:
                    mediators.append(h)
            assert len(mediators) == 1


def test_pullback_is_intersection():
    path = Graph(X, (0, 0, 0), ((0, 0, 1), (0, 1, 2)))
    b, ba, bc = pullback(inc(EDGE, path, (0, 1), (0,)), inc(EDGE, path, (1, 2), (1,)))
    assert b.n_vertices == 1 and b.n_edges == 0
    assert ba.vmap == (1,) and bc.vmap == (0,)


def test_apply_creation_deletion_trivial():
    create = discrete_rule(X, 1, 0)
    g = Graph(X, (0, 0), ((0, 0, 1),))
    out = apply_rule(create, g, Morphism.empty(g))
    assert out.n_vertices == 3 and out.n_edges == 1
    delete = discrete_rule(X, 0, 1)
    assert apply_rule(delete, EDGE, inc(V, EDGE, (1,))) is None
    triv = LinearRule.trivial(X)
    assert apply_rule(triv, g, Morphism.empty(g)) == g
    delete2 = discrete_rule(X, 0, 2)
    with pytest.raises(ValueError):
        apply_rule(delete2, V, Morphism(delete2.input, V, (0, 0), ()))


@settings(max_examples=120, deadline=None)
@given(seeds)
def test_apply_matches_bruteforce(seed):
    rng = random.Random(seed)
    r, x = random_rule(rng), random_graph(rng, 4, 4)
    ours = []
    for m, mult in admissible_matches(r, x):
        ours.append((mult, apply_rule(r, x, m)))
    ref = state_dict((1, g) for g in apply_all(r, x))
    got = state_dict(ours)
    assert len(got) == len(ref)
    for g, w in got:
        assert any(isomorphic(g, h) and w == v for h, v in ref)


def test_discrete_match_counts():
    sig = ColorSignature(("X",))
    for p2 in range(5):
        for q2 in range(5):
            for p1 in range(5):
                for q1 in range(5):
                    ms = enumerate_rule_matches(discrete_rule(sig, p2, q2), discrete_rule(sig, p1, q1))
                    for k in range(min(q2, p1) + 1):
                        want = math.factorial(k) * math.comb(q2, k) * math.comb(p1, k)
                        assert sum(1 for m in ms if m.overlap.n_vertices == k) == want


def test_hw_composition():
    sig = ColorSignature(("X",))
    x, xd = discrete_rule(sig, 0, 1), discrete_rule(sig, 1, 0)
    ms = enumerate_rule_matches(x, xd)
    assert len(ms) == 2 and ms[0].is_trivial()
    keys = sorted(repr(compose_rules(x, xd, m).key) for m in ms)
    assert keys == sorted(repr(discrete_rule(sig, p, p).key) for p in (0, 1))
    # x† then x along the single vertex gives the trivial rule
    nontriv = [m for m in ms if not m.is_trivial()][0]
    assert compose_rules(x, xd, nontriv).key == LinearRule.trivial(sig).key


def test_empty_input_only_trivial():
    r1 = discrete_rule(X, 2, 0)
    assert len(enumerate_rule_matches(r1, discrete_rule(X, 3, 1))) == 1


def flip_rule():
    """The black endpoint of a white-black edge re-attaches to another white vertex."""
    sig = ColorSignature(("w", "b"), (("e", False),))
    k = Graph(sig, (0, 0, 1))
    i = Graph(sig, (0, 0, 1), ((0, 1, 2),))
    o = Graph(sig, (0, 0, 1), ((0, 0, 2),))
    ident = ((0, 1, 2), ())
    return LinearRule(o, k, i, Morphism(k, o, *ident), Morphism(k, i, *ident))


def test_flip_self_composition_grows():
    r = flip_rule()
    sizes = set()
    for mu in enumerate_rule_matches(r, r):
        c = compose_rules(r, r, mu)
        if c is not None and mu.overlap.n_vertices == 1 and mu.overlap.colors == (0,):
            sizes.add(c.input.n_vertices)
    assert 5 in sizes  # one shared white vertex: 3 + 3 - 1


def test_rule_canonical_examples():
    sig = ColorSignature(("X",))
    r = flip_rule()
    # same rule with the context listed in a different order
    k = Graph(r.signature, (1, 0, 0))
    i = Graph(r.signature, (1, 0, 0), ((0, 2, 0),))
    o = Graph(r.signature, (1, 0, 0), ((0, 1, 0),))
    ident = ((0, 1, 2), ())
    r2 = LinearRule(o, k, i, Morphism(k, o, *ident), Morphism(k, i, *ident))
    assert rule_canonical_form(r) == rule_canonical_form(r2)
    assert rule_canonical_form(discrete_rule(sig, 1, 0)) != rule_canonical_form(discrete_rule(sig, 0, 1))
    v = Graph(sig, (0,))
    ident_rule = LinearRule(v, v, v, Morphism.identity(v), Morphism.identity(v))
    assert rule_canonical_form(ident_rule) != rule_canonical_form(LinearRule.trivial(sig))


def test_rule_json_round_trip():
    r = flip_rule()
    assert rule_from_json(r.to_json(), r.signature).key == r.key


@settings(max_examples=80, deadline=None)
@given(seeds)
def test_trivial_composition_commutes(seed):
    rng = random.Random(seed)
    r1, r2 = random_rule(rng), random_rule(rng)
    a = compose_rules(r1, r2, trivial_match(r1, r2))
    b = compose_rules(r2, r1, trivial_match(r2, r1))
    assert rule_canonical_form(a) == rule_canonical_form(b)


@settings(max_examples=80, deadline=None)
@given(seeds)
def test_unit_law(seed):
    r = random_rule(random.Random(seed))
    e = LinearRule.trivial(SIG)
    assert compose_rules(r, e, trivial_match(r, e)).key == r.key
    assert compose_rules(e, r, trivial_match(e, r)).key == r.key


@settings(max_examples=60, deadline=None)
@given(seeds)
def test_graph_certificates_relabelling(seed):
    g = random_graph(random.Random(seed), 5, 5)
    assert canonical_form(g) == canonical_form(Graph(g.signature, g.colors, tuple(reversed(g.edges))))
