"""Double-pushout rewriting: gluing, pushout complements and rule composition."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterator

from .graph import (
    CanonicalForm,
    Graph,
    Morphism,
    SignatureMismatch,
    canonical_code,
    vertex_embeddings,
    first_edge_map,
)


def pushout_complement(k_to_i: Morphism, i_to_x: Morphism):
    """Delete ``image(I) \\ image(K)`` from X.

    Returns ``(X', K -> X', X' -> X)`` or ``None`` when the dangling
    condition fails.
    """
    if k_to_i.cod is not i_to_x.dom and k_to_i.cod != i_to_x.dom:
        raise ValueError("morphisms are not composable")
    x = i_to_x.cod
    kept_i_v = set(k_to_i.vmap)
    kept_i_e = set(k_to_i.emap)
    del_v = {i_to_x.vmap[v] for v in range(i_to_x.dom.n_vertices) if v not in kept_i_v}
    del_e = {i_to_x.emap[e] for e in range(i_to_x.dom.n_edges) if e not in kept_i_e}
    for dv in del_v:
        for e in x.incident[dv]:
            if e not in del_e:
                return None
    keep_v = [v for v in range(x.n_vertices) if v not in del_v]
    keep_e = [e for e in range(x.n_edges) if e not in del_e]
    xp, incl = x.subgraph(keep_v, keep_e)
    vpos = {v: i for i, v in enumerate(keep_v)}
    epos = {e: i for i, e in enumerate(keep_e)}
    k_to_x = k_to_i.then(i_to_x)
    k_to_xp = Morphism(
        k_to_i.dom,
        xp,
        tuple(vpos[v] for v in k_to_x.vmap),
        tuple(epos[e] for e in k_to_x.emap),
    )
    return xp, k_to_xp, incl


def pushout(b_to_a: Morphism, b_to_c: Morphism):
    """Glue A and C along B; returns ``(P, A -> P, C -> P)`` with A's ids first."""
    a, c = b_to_a.cod, b_to_c.cod
    if a.signature != c.signature:
        raise SignatureMismatch("pushout legs have different signatures")
    inv_v = {w: v for v, w in enumerate(b_to_c.vmap)}
    inv_e = {f: e for e, f in enumerate(b_to_c.emap)}
    colors = list(a.colors)
    cv = []
    for w in range(c.n_vertices):
        if w in inv_v:
            cv.append(b_to_a.vmap[inv_v[w]])
        else:
            cv.append(len(colors))
            colors.append(c.colors[w])
    edges = list(a.edges)
    ce = []
    for f, (s, u, v) in enumerate(c.edges):
        if f in inv_e:
            ce.append(b_to_a.emap[inv_e[f]])
        else:
            ce.append(len(edges))
            edges.append((s, cv[u], cv[v]))
    p = Graph(a.signature, tuple(colors), tuple(edges))
    a_to_p = Morphism(a, p, tuple(range(a.n_vertices)), tuple(range(a.n_edges)))
    c_to_p = Morphism(c, p, tuple(cv), tuple(ce))
    return p, a_to_p, c_to_p


def pullback(a_to_d: Morphism, c_to_d: Morphism):
    """Intersection of the images of two monos; returns ``(B, B -> A, B -> C)``."""
    cinv_v = {w: v for v, w in enumerate(c_to_d.vmap)}
    cinv_e = {f: e for e, f in enumerate(c_to_d.emap)}
    a = a_to_d.dom
    bv = [v for v in range(a.n_vertices) if a_to_d.vmap[v] in cinv_v]
    be = [e for e in range(a.n_edges) if a_to_d.emap[e] in cinv_e]
    b, b_to_a = a.subgraph(bv, be)
    b_to_c = Morphism(
        b,
        c_to_d.dom,
        tuple(cinv_v[a_to_d.vmap[v]] for v in bv),
        tuple(cinv_e[a_to_d.emap[e]] for e in be),
    )
    return b, b_to_a, b_to_c


@dataclass(frozen=True, eq=False)
class LinearRule:
    """Span ``O <-o- K -i-> I`` of monos; rewriting goes from I to O."""

    output: Graph
    context: Graph
    input: Graph
    o_embed: Morphism
    i_embed: Morphism
    name: str = ""

    def __post_init__(self):
        for m, cod in ((self.o_embed, self.output), (self.i_embed, self.input)):
            if m.dom != self.context or m.cod != cod:
                raise ValueError("rule embeddings must start at the context graph")
            if not (m.is_valid() and m.is_mono()):
                raise ValueError("rule embeddings must be monomorphisms")

    @property
    def signature(self):
        return self.context.signature

    @cached_property
    def key(self):
        return _rule_code(self)

    @cached_property
    def deleted_vertices(self) -> frozenset[int]:
        return frozenset(range(self.input.n_vertices)) - set(self.i_embed.vmap)

    @cached_property
    def created_vertices(self) -> frozenset[int]:
        return frozenset(range(self.output.n_vertices)) - set(self.o_embed.vmap)

    def is_diagonal_form(self) -> bool:
        return self.output == self.input and self.o_embed.vmap == self.i_embed.vmap and self.o_embed.emap == self.i_embed.emap

    def jump_closed(self) -> "LinearRule":
        """The rule with its output leg replaced by its input leg."""
        return LinearRule(self.input, self.context, self.input, self.i_embed, self.i_embed, self.name)

    @classmethod
    def from_subgraph(cls, pattern: Graph, core_vertices, core_edges=(), name: str = ""):
        """Diagonal rule ``P <- K -> P`` for a core subgraph of P."""
        k, incl = pattern.subgraph(core_vertices, core_edges)
        return cls(pattern, k, pattern, incl, incl, name)

    @classmethod
    def trivial(cls, signature) -> "LinearRule":
        e = Graph(signature)
        idm = Morphism.identity(e)
        return cls(e, e, e, idm, idm)

    def text(self) -> str:
        names_k = [f"k{i}" for i in range(self.context.n_vertices)]
        return "[" + _side(self.output, self.o_embed, names_k, "o") + "←" + self.context.text(names_k) + "→" + _side(self.input, self.i_embed, names_k, "i") + "]"

    def to_json(self) -> dict:
        kids = [f"k{i}" for i in range(self.context.n_vertices)]
        keids = [f"ke{i}" for i in range(self.context.n_edges)]

        def ids(g, m, p):
            vid = [f"{p}{i}" for i in range(g.n_vertices)]
            eid = [f"{p}e{i}" for i in range(g.n_edges)]
            return vid, eid

        ov, oe = ids(self.output, self.o_embed, "o")
        iv, ie = ids(self.input, self.i_embed, "i")
        o_map = {kids[i]: ov[w] for i, w in enumerate(self.o_embed.vmap)}
        o_map.update({keids[i]: oe[f] for i, f in enumerate(self.o_embed.emap)})
        i_map = {kids[i]: iv[w] for i, w in enumerate(self.i_embed.vmap)}
        i_map.update({keids[i]: ie[f] for i, f in enumerate(self.i_embed.emap)})
        return {
            "name": self.name,
            "output": self.output.to_json(ov, oe),
            "context": self.context.to_json(kids, keids),
            "input": self.input.to_json(iv, ie),
            "o_map": o_map,
            "i_map": i_map,
        }


def _side(g: Graph, m: Morphism, names_k, prefix) -> str:
    names = [None] * g.n_vertices
    for i, w in enumerate(m.vmap):
        names[w] = names_k[i]
    j = 0
    for v in range(g.n_vertices):
        if names[v] is None:
            names[v] = f"{prefix}{j}"
            j += 1
    return g.text(names)


def rule_from_json(data: dict, signature) -> LinearRule:
    from .graph import graph_from_json

    out, ov, oe = graph_from_json(data["output"], signature)
    ctx, kv, ke = graph_from_json(data["context"], signature)
    inp, iv, ie = graph_from_json(data["input"], signature)

    def leg(mapping, tv, te, cod, which):
        vm, em = [], []
        for kid in kv:
            if kid not in mapping or mapping[kid] not in tv:
                raise ValueError(f"rule {data.get('name', '')!r}: {which} does not map context vertex {kid!r}")
            vm.append(tv[mapping[kid]])
        for kid in ke:
            if kid not in mapping or mapping[kid] not in te:
                raise ValueError(f"rule {data.get('name', '')!r}: {which} does not map context edge {kid!r}")
            em.append(te[mapping[kid]])
        return Morphism(ctx, cod, tuple(vm), tuple(em))

    return LinearRule(
        out,
        ctx,
        inp,
        leg(data.get("o_map", {}), ov, oe, out, "o_map"),
        leg(data.get("i_map", {}), iv, ie, inp, "i_map"),
        data.get("name", ""),
    )


def rule_canonical_form(r: LinearRule) -> CanonicalForm:
    return CanonicalForm(r.key)


def _rule_code(r: LinearRule):
    # incidence encoding: every vertex and edge of O, K, I becomes a node;
    # arcs attach edge nodes to endpoints and track the two embeddings
    colors: list[tuple] = []
    arcs: list[tuple[int, int, int, bool]] = []
    sig = r.signature
    offsets = []
    for layer, g in enumerate((r.output, r.context, r.input)):
        vbase = len(colors)
        colors.extend((0, layer, c) for c in g.colors)
        ebase = len(colors)
        for j, (s, u, v) in enumerate(g.edges):
            colors.append((1, layer, s))
            node = ebase + j
            if sig.directed(s):
                arcs.append((0, node, vbase + u, True))
                arcs.append((1, node, vbase + v, True))
            else:
                arcs.append((2, node, vbase + u, True))
                arcs.append((2, node, vbase + v, True))
        offsets.append((vbase, ebase))
    (ov, oe), (kv, ke), (iv, ie) = offsets
    for typ, m, (tv, te) in ((3, r.o_embed, (ov, oe)), (4, r.i_embed, (iv, ie))):
        for i, w in enumerate(m.vmap):
            arcs.append((typ, kv + i, tv + w, True))
        for i, f in enumerate(m.emap):
            arcs.append((typ, ke + i, te + f, True))
    return (sig, canonical_code(colors, arcs))


# --------------------------------------------------------------------------
# derivations

def apply_rule(rule: LinearRule, host: Graph, m: Morphism):
    """Rewrite ``host`` at the match ``m: I -> host``; ``None`` if inadmissible."""
    if not m.is_mono():
        raise ValueError("match must be a monomorphism")
    if m.dom != rule.input or m.cod != host:
        raise ValueError("match must go from the rule input to the host")
    poc = pushout_complement(rule.i_embed, m)
    if poc is None:
        return None
    xp, k_to_xp, _ = poc
    result, _, _ = pushout(k_to_xp, rule.o_embed)
    return result


def admissible_matches(rule: LinearRule, host: Graph) -> Iterator[tuple[Morphism, int]]:
    """Admissible matches of the rule input into ``host`` up to parallel-edge
    relabelling: yields one representative per vertex map and its multiplicity.

    Parallel host edges with equal endpoints are swapped by a host
    automorphism fixing every vertex, so all edge maps over one vertex map
    produce isomorphic results.
    """
    for vmap, mult in vertex_embeddings(rule.input, host, rule.deleted_vertices):
        emap = first_edge_map(rule.input, host, vmap)
        yield Morphism(rule.input, host, vmap, emap), mult


# --------------------------------------------------------------------------
# sequential composition

@dataclass(frozen=True)
class RuleMatch:
    overlap: Graph
    into_input1: Morphism
    into_output2: Morphism

    def is_trivial(self) -> bool:
        return self.overlap.is_empty()


def trivial_match(r1: LinearRule, r2: LinearRule) -> RuleMatch:
    e = Graph(r1.signature)
    return RuleMatch(e, Morphism(e, r1.input, (), ()), Morphism(e, r2.output, (), ()))


def enumerate_rule_matches(r1: LinearRule, r2: LinearRule) -> list[RuleMatch]:
    """Admissible overlaps of ``I1`` (of r1) with ``O2`` (of r2).

    Each overlap is a subgraph of I1 with a mono into O2; only overlaps along
    which :func:`compose_rules` succeeds are returned, trivial match first.
    """
    if r1.signature != r2.signature:
        raise SignatureMismatch("rules do not share a signature")
    return list(_iter_rule_matches(r1, r2))


def _iter_rule_matches(r1: LinearRule, r2: LinearRule) -> Iterator[RuleMatch]:
    i1, o2 = r1.input, r2.output
    del1 = r1.deleted_vertices
    new2 = r2.created_vertices
    n1 = i1.n_vertices
    vm = [-1] * n1
    used_v = [False] * o2.n_vertices
    i1_inc, o2_inc = i1.incident, o2.incident

    def edges_stage():
        cand = [e for e, (_, u, v) in enumerate(i1.edges) if vm[u] >= 0 and vm[v] >= 0]
        em: dict[int, int] = {}
        used_e: set[int] = set()

        def rec(idx):
            if idx == len(cand):
                if _overlap_admissible(em, used_e):
                    yield dict(em)
                return
            yield from rec(idx + 1)
            e = cand[idx]
            key = i1.edge_key(e, vm)
            for f in o2.edge_groups.get(key, ()):
                if f in used_e:
                    continue
                em[e] = f
                used_e.add(f)
                yield from rec(idx + 1)
                used_e.discard(f)
                del em[e]

        yield from rec(0)

    def _overlap_admissible(em, used_e):
        for v1 in range(n1):
            v2 = vm[v1]
            if v2 < 0:
                continue
            if v1 in del1 and any(f not in used_e for f in o2_inc[v2]):
                return False
            if v2 in new2 and any(e not in em for e in i1_inc[v1]):
                return False
        return True

    def vertices_stage(v1):
        if v1 == n1:
            for em in edges_stage():
                verts = [v for v in range(n1) if vm[v] >= 0]
                edges = sorted(em)
                m, incl = i1.subgraph(verts, edges)
                to2 = Morphism(m, o2, tuple(vm[v] for v in verts), tuple(em[e] for e in edges))
                yield RuleMatch(m, incl, to2)
            return
        yield from vertices_stage(v1 + 1)
        for w in range(o2.n_vertices):
            if used_v[w] or o2.colors[w] != i1.colors[v1]:
                continue
            vm[v1] = w
            used_v[w] = True
            yield from vertices_stage(v1 + 1)
            used_v[w] = False
            vm[v1] = -1

    yield from vertices_stage(0)


def compose_rules(r1: LinearRule, r2: LinearRule, mu: RuleMatch):
    """Composite rule ``r1 ◁μ▷ r2`` (apply r2 first, then r1), or ``None``."""
    if mu.into_input1.cod != r1.input or mu.into_output2.cod != r2.output:
        raise ValueError("match legs must target I1 and O2")
    if not (mu.into_input1.is_mono() and mu.into_output2.is_mono()):
        raise ValueError("match legs must be monomorphisms")
    mp, i1_to_mp, o2_to_mp = pushout(mu.into_input1, mu.into_output2)
    poc2 = pushout_complement(r2.o_embed, o2_to_mp)
    if poc2 is None:
        return None
    poc1 = pushout_complement(r1.i_embed, i1_to_mp)
    if poc1 is None:
        return None
    k2p, k2_to_k2p, k2p_to_mp = poc2
    k1p, k1_to_k1p, k1p_to_mp = poc1
    o12, _, k1p_to_o12 = pushout(r1.o_embed, k1_to_k1p)
    i12, _, k2p_to_i12 = pushout(r2.i_embed, k2_to_k2p)
    k12, k12_to_k1p, k12_to_k2p = pullback(k1p_to_mp, k2p_to_mp)
    return LinearRule(
        o12,
        k12,
        i12,
        k12_to_k1p.then(k1p_to_o12),
        k12_to_k2p.then(k2p_to_i12),
    )


def discrete_rule(signature, p: int, q: int, color: int = 0) -> LinearRule:
    """``r_{p,q}``: delete q vertices of one color, create p of them."""
    e = Graph(signature)
    out = Graph(signature, (color,) * p)
    inp = Graph(signature, (color,) * q)
    return LinearRule(out, e, inp, Morphism(e, out, (), ()), Morphism(e, inp, (), ()))
