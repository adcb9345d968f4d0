"""Slow, obviously-correct reference implementations used as test oracles."""

from __future__ import annotations

import itertools
import random
from fractions import Fraction

from hypothesis import strategies as st

from rasir.dpo import LinearRule
from rasir.graph import ColorSignature, Graph, Morphism

SIG = ColorSignature(("a", "b"), (("d", True), ("u", False)))


def _norm(sig, s, u, v):
    if not sig.directed(s) and u > v:
        u, v = v, u
    return (s, u, v)


def isomorphic(g: Graph, h: Graph) -> bool:
    """Exhaustive search over colour-preserving vertex bijections."""
    if sorted(g.colors) != sorted(h.colors) or g.n_edges != h.n_edges:
        return False
    target = sorted(h.edges)
    for perm in itertools.permutations(range(h.n_vertices)):
        if any(g.colors[i] != h.colors[p] for i, p in enumerate(perm)):
            continue
        if sorted(_norm(g.signature, s, perm[u], perm[v]) for s, u, v in g.edges) == target:
            return True
    return False


def monos(pattern: Graph, host: Graph):
    """Every mono as ``(vmap, emap)`` by trying all injections independently."""
    sig = pattern.signature
    out = []
    for vmap in itertools.permutations(range(host.n_vertices), pattern.n_vertices):
        if any(pattern.colors[i] != host.colors[w] for i, w in enumerate(vmap)):
            continue
        for emap in itertools.permutations(range(host.n_edges), pattern.n_edges):
            if all(_norm(sig, s, vmap[u], vmap[v]) == host.edges[f] for (s, u, v), f in zip(pattern.edges, emap)):
                out.append((vmap, emap))
    return out


def dangling_ok(rule: LinearRule, host: Graph, vmap, emap) -> bool:
    kept = set(rule.i_embed.vmap)
    deleted = {vmap[v] for v in range(rule.input.n_vertices) if v not in kept}
    hit = set(emap)
    for f, (_, u, v) in enumerate(host.edges):
        if (u in deleted or v in deleted) and f not in hit:
            return False
    return True


def rewrite(rule: LinearRule, host: Graph, vmap, emap) -> Graph | None:
    """Delete the non-context part of the match, then glue in the new output part."""
    if not dangling_ok(rule, host, vmap, emap):
        return None
    kv, ke = set(rule.i_embed.vmap), set(rule.i_embed.emap)
    del_v = {vmap[v] for v in range(rule.input.n_vertices) if v not in kv}
    del_e = {emap[e] for e in range(rule.input.n_edges) if e not in ke}
    keep = [w for w in range(host.n_vertices) if w not in del_v]
    pos = {w: i for i, w in enumerate(keep)}
    colors = [host.colors[w] for w in keep]
    edges = [(s, pos[u], pos[v]) for f, (s, u, v) in enumerate(host.edges) if f not in del_e]
    # where each output vertex lands
    where = {}
    for k, (o, i) in enumerate(zip(rule.o_embed.vmap, rule.i_embed.vmap)):
        where[o] = pos[vmap[i]]
    for o in range(rule.output.n_vertices):
        if o not in where:
            where[o] = len(colors)
            colors.append(rule.output.colors[o])
    ctx_out_edges = set(rule.o_embed.emap)
    for f, (s, u, v) in enumerate(rule.output.edges):
        if f not in ctx_out_edges:
            edges.append((s, where[u], where[v]))
    return Graph(host.signature, tuple(colors), tuple(edges))


def apply_all(rule: LinearRule, host: Graph) -> list[Graph]:
    """Results over every admissible match, one list entry per match."""
    out = []
    for vmap, emap in monos(rule.input, host):
        r = rewrite(rule, host, vmap, emap)
        if r is not None:
            out.append(r)
    return out


def state_dict(pairs):
    """Collect ``(weight, graph)`` pairs into a map keyed by brute-force iso class."""
    reps: list[tuple[Graph, Fraction]] = []
    for w, g in pairs:
        for i, (h, acc) in enumerate(reps):
            if isomorphic(g, h):
                reps[i] = (h, acc + w)
                break
        else:
            reps.append((g, Fraction(w)))
    return [(h, w) for h, w in reps if w]


# --------------------------------------------------------------------------
# random generators

def random_graph(rng: random.Random, max_vertices: int = 4, max_edges: int = 4, sig=SIG) -> Graph:
    n = rng.randint(0, max_vertices)
    colors = tuple(rng.randrange(len(sig.vertex_colors)) for _ in range(n))
    edges = []
    if n:
        for _ in range(rng.randint(0, max_edges)):
            edges.append((rng.randrange(len(sig.edge_sorts)), rng.randrange(n), rng.randrange(n)))
    return Graph(sig, colors, tuple(edges))


def random_rule(rng: random.Random, max_interface: int = 3, sig=SIG) -> LinearRule:
    """Random span with at most ``max_interface`` vertices in each of O and I."""
    nk = rng.randint(0, min(2, max_interface))
    kcol = [rng.randrange(len(sig.vertex_colors)) for _ in range(nk)]
    kedges = []
    if nk:
        for _ in range(rng.randint(0, 1)):
            kedges.append((rng.randrange(len(sig.edge_sorts)), rng.randrange(nk), rng.randrange(nk)))

    def side():
        extra = rng.randint(0, max_interface - nk)
        cols = kcol + [rng.randrange(len(sig.vertex_colors)) for _ in range(extra)]
        edges = list(kedges)
        n = len(cols)
        if n:
            for _ in range(rng.randint(0, 2)):
                edges.append((rng.randrange(len(sig.edge_sorts)), rng.randrange(n), rng.randrange(n)))
        return Graph(sig, tuple(cols), tuple(edges))

    k = Graph(sig, tuple(kcol), tuple(kedges))
    o, i = side(), side()
    ident = (tuple(range(nk)), tuple(range(len(kedges))))
    return LinearRule(o, k, i, Morphism(k, o, *ident), Morphism(k, i, *ident))


seeds = st.integers(min_value=0, max_value=2**32 - 1)
