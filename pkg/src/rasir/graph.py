"""Finite colored multigraphs, monomorphisms and canonical forms.

Vertices and edges are densified to integer indices.  A graph stores a color
index per vertex and a ``(sort, u, v)`` triple per edge; for undirected sorts
the endpoints are kept sorted so that ``u <= v``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterator, Sequence


class SignatureMismatch(ValueError):
    pass


@dataclass(frozen=True)
class ColorSignature:
    """Vertex color names and edge sorts ``(name, directed)``."""

    vertex_colors: tuple[str, ...]
    edge_sorts: tuple[tuple[str, bool], ...] = ()

    def __post_init__(self):
        names = list(self.vertex_colors)
        sorts = [s for s, _ in self.edge_sorts]
        for group, what in ((names, "vertex color"), (sorts, "edge sort")):
            if any(not isinstance(n, str) or not n for n in group):
                raise ValueError(f"{what} names must be non-empty strings")
            if len(set(group)) != len(group):
                raise ValueError(f"duplicate {what} name")

    def color_index(self, name: str) -> int:
        try:
            return self.vertex_colors.index(name)
        except ValueError:
            raise KeyError(f"unknown vertex color {name!r}") from None

    def sort_index(self, name: str) -> int:
        for i, (s, _) in enumerate(self.edge_sorts):
            if s == name:
                return i
        raise KeyError(f"unknown edge sort {name!r}")

    def directed(self, sort: int) -> bool:
        return self.edge_sorts[sort][1]

    def to_json(self) -> dict:
        return {
            "vertex_colors": list(self.vertex_colors),
            "edge_sorts": [{"name": s, "directed": d} for s, d in self.edge_sorts],
        }

    @classmethod
    def from_json(cls, data: dict) -> "ColorSignature":
        return cls(
            tuple(data["vertex_colors"]),
            tuple((e["name"], bool(e["directed"])) for e in data.get("edge_sorts", [])),
        )


@dataclass(frozen=True)
class Graph:
    signature: ColorSignature
    colors: tuple[int, ...] = ()
    edges: tuple[tuple[int, int, int], ...] = ()

    def __post_init__(self):
        n = len(self.colors)
        norm = []
        for s, u, v in self.edges:
            if not (0 <= u < n and 0 <= v < n):
                raise ValueError(f"edge endpoint out of range: {(s, u, v)}")
            if not 0 <= s < len(self.signature.edge_sorts):
                raise ValueError(f"unknown edge sort index {s}")
            if not self.signature.directed(s) and u > v:
                u, v = v, u
            norm.append((s, u, v))
        for c in self.colors:
            if not 0 <= c < len(self.signature.vertex_colors):
                raise ValueError(f"unknown color index {c}")
        object.__setattr__(self, "colors", tuple(self.colors))
        object.__setattr__(self, "edges", tuple(norm))

    @property
    def n_vertices(self) -> int:
        return len(self.colors)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def is_empty(self) -> bool:
        return not self.colors

    @cached_property
    def incident(self) -> tuple[tuple[int, ...], ...]:
        """Edge indices incident to each vertex (a loop is listed once)."""
        inc: list[list[int]] = [[] for _ in self.colors]
        for e, (_, u, v) in enumerate(self.edges):
            inc[u].append(e)
            if v != u:
                inc[v].append(e)
        return tuple(tuple(x) for x in inc)

    @cached_property
    def edge_groups(self) -> dict[tuple[int, int, int], tuple[int, ...]]:
        """Parallel edge classes keyed by ``(sort, u, v)``."""
        groups: dict[tuple[int, int, int], list[int]] = {}
        for e, key in enumerate(self.edges):
            groups.setdefault(key, []).append(e)
        return {k: tuple(v) for k, v in groups.items()}

    @cached_property
    def key(self):
        """Hashable isomorphism-class key (see :func:`canonical_form`)."""
        return _graph_code(self)

    def edge_key(self, e: int, vmap: Sequence[int]) -> tuple[int, int, int]:
        s, u, v = self.edges[e]
        a, b = vmap[u], vmap[v]
        if not self.signature.directed(s) and a > b:
            a, b = b, a
        return (s, a, b)

    def subgraph(self, vertices: Sequence[int], edges: Sequence[int] | None = None):
        """Induced-on-edges subgraph; returns ``(graph, inclusion morphism)``.

        Without ``edges`` every edge between kept vertices is kept.
        """
        vertices = sorted(vertices)
        pos = {v: i for i, v in enumerate(vertices)}
        if edges is None:
            edges = [e for e, (_, u, v) in enumerate(self.edges) if u in pos and v in pos]
        edges = sorted(edges)
        sub = Graph(
            self.signature,
            tuple(self.colors[v] for v in vertices),
            tuple((self.edges[e][0], pos[self.edges[e][1]], pos[self.edges[e][2]]) for e in edges),
        )
        return sub, Morphism(sub, self, tuple(vertices), tuple(edges))

    def to_json(self, vertex_ids: Sequence[str] | None = None, edge_ids: Sequence[str] | None = None) -> dict:
        vid = list(vertex_ids) if vertex_ids is not None else [f"v{i}" for i in range(self.n_vertices)]
        eid = list(edge_ids) if edge_ids is not None else [f"e{i}" for i in range(self.n_edges)]
        sig = self.signature
        return {
            "vertices": [{"id": vid[i], "color": sig.vertex_colors[c]} for i, c in enumerate(self.colors)],
            "edges": [
                {"id": eid[j], "sort": sig.edge_sorts[s][0], "ends": [vid[u], vid[v]]}
                for j, (s, u, v) in enumerate(self.edges)
            ],
        }

    def text(self, names: Sequence[str] | None = None) -> str:
        """Compact human-readable rendering, ``∅`` for the empty graph."""
        if not self.colors:
            return "∅"
        names = list(names) if names is not None else [str(i) for i in range(self.n_vertices)]
        sig = self.signature
        parts = [f"{sig.vertex_colors[c]}:{names[i]}" for i, c in enumerate(self.colors)]
        etoks = []
        for s, u, v in self.edges:
            name, directed = sig.edge_sorts[s]
            arrow = "->" if directed else "-"
            prefix = f"{name}:" if len(sig.edge_sorts) > 1 else ""
            etoks.append(f"{prefix}{names[u]}{arrow}{names[v]}")
        body = " ".join(parts)
        if etoks:
            body += "; " + " ".join(etoks)
        return "(" + body + ")"


def graph_from_json(data: dict, signature: ColorSignature):
    """Parse the JSON graph encoding.

    Returns ``(graph, vertex_index, edge_index)`` where the two dicts map the
    file's string ids to dense indices.
    """
    vindex: dict[str, int] = {}
    colors = []
    for v in data.get("vertices", []):
        vid = str(v["id"])
        if vid in vindex:
            raise ValueError(f"duplicate vertex id {vid!r}")
        vindex[vid] = len(colors)
        colors.append(signature.color_index(v["color"]))
    eindex: dict[str, int] = {}
    edges = []
    for e in data.get("edges", []):
        eid = str(e["id"])
        if eid in eindex:
            raise ValueError(f"duplicate edge id {eid!r}")
        a, b = (str(x) for x in e["ends"])
        for end in (a, b):
            if end not in vindex:
                raise ValueError(f"edge {eid!r} references unknown vertex {end!r}")
        eindex[eid] = len(edges)
        edges.append((signature.sort_index(e["sort"]), vindex[a], vindex[b]))
    return Graph(signature, tuple(colors), tuple(edges)), vindex, eindex


@dataclass(frozen=True)
class Morphism:
    dom: Graph
    cod: Graph
    vmap: tuple[int, ...]
    emap: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "vmap", tuple(self.vmap))
        object.__setattr__(self, "emap", tuple(self.emap))

    def is_valid(self) -> bool:
        if len(self.vmap) != self.dom.n_vertices or len(self.emap) != self.dom.n_edges:
            return False
        for v, w in enumerate(self.vmap):
            if not 0 <= w < self.cod.n_vertices or self.dom.colors[v] != self.cod.colors[w]:
                return False
        for e, f in enumerate(self.emap):
            if not 0 <= f < self.cod.n_edges:
                return False
            if self.dom.edge_key(e, self.vmap) != self.cod.edges[f]:
                return False
        return True

    def is_mono(self) -> bool:
        return len(set(self.vmap)) == len(self.vmap) and len(set(self.emap)) == len(self.emap)

    def then(self, other: "Morphism") -> "Morphism":
        """``other ∘ self``."""
        return Morphism(
            self.dom,
            other.cod,
            tuple(other.vmap[v] for v in self.vmap),
            tuple(other.emap[e] for e in self.emap),
        )

    @classmethod
    def identity(cls, g: Graph) -> "Morphism":
        return cls(g, g, tuple(range(g.n_vertices)), tuple(range(g.n_edges)))

    @classmethod
    def empty(cls, g: Graph) -> "Morphism":
        return cls(Graph(g.signature), g, (), ())


def _check_same_signature(a: Graph, b: Graph) -> None:
    if a.signature != b.signature:
        raise SignatureMismatch("graphs do not share a color signature")


def disjoint_union(g1: Graph, g2: Graph) -> Graph:
    _check_same_signature(g1, g2)
    off = g1.n_vertices
    return Graph(
        g1.signature,
        g1.colors + g2.colors,
        g1.edges + tuple((s, u + off, v + off) for s, u, v in g2.edges),
    )


def connected_components(g: Graph) -> list[Graph]:
    return [g.subgraph(vs)[0] for vs in component_vertex_sets(g)]


def component_vertex_sets(g: Graph) -> list[list[int]]:
    parent = list(range(g.n_vertices))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for _, u, v in g.edges:
        ru, rv = find(u), find(v)
        if ru != rv:
            parent[max(ru, rv)] = min(ru, rv)
    comps: dict[int, list[int]] = {}
    for v in range(g.n_vertices):
        comps.setdefault(find(v), []).append(v)
    return list(comps.values())


def is_connected(g: Graph) -> bool:
    return g.n_vertices > 0 and len(component_vertex_sets(g)) == 1


# --------------------------------------------------------------------------
# monomorphism enumeration

def _falling(n: int, k: int) -> int:
    out = 1
    for i in range(k):
        out *= n - i
    return out


def vertex_embeddings(pattern: Graph, host: Graph, deleted: frozenset[int] = frozenset()) -> Iterator[tuple[tuple[int, ...], int]]:
    """Yield ``(vertex_map, edge_multiplicity)`` for injective vertex maps
    that extend to at least one mono.

    ``edge_multiplicity`` is the number of distinct edge maps completing the
    vertex map.  Pattern vertices in ``deleted`` must additionally satisfy the
    dangling condition: every host edge at their image is hit.
    """
    _check_same_signature(pattern, host)
    n = pattern.n_vertices
    if n > host.n_vertices:
        return
    # pattern edges whose later endpoint is v, grouped per vertex
    later: list[list[int]] = [[] for _ in range(n)]
    for e, (_, u, v) in enumerate(pattern.edges):
        later[max(u, v)].append(e)
    p_inc = pattern.incident
    h_inc = host.incident
    hgroups = host.edge_groups
    by_color: dict[int, list[int]] = {}
    for w, c in enumerate(host.colors):
        by_color.setdefault(c, []).append(w)
    vmap = [-1] * n
    used = [False] * host.n_vertices

    def local_ok(v: int) -> int:
        # counts parallel groups closed at v; returns multiplicity or 0
        need: dict[tuple[int, int, int], int] = {}
        for e in later[v]:
            k = pattern.edge_key(e, vmap)
            need[k] = need.get(k, 0) + 1
        mult = 1
        for k, cnt in need.items():
            have = len(hgroups.get(k, ()))
            if have < cnt:
                return 0
            mult *= _falling(have, cnt)
        return mult

    def rec(v: int, mult: int):
        if v == n:
            yield tuple(vmap), mult
            return
        deg = len(p_inc[v])
        for w in by_color.get(pattern.colors[v], ()):
            if used[w] or len(h_inc[w]) < deg:
                continue
            if v in deleted and len(h_inc[w]) != deg:
                continue
            vmap[v] = w
            m = local_ok(v)
            if m:
                used[w] = True
                yield from rec(v + 1, mult * m)
                used[w] = False
            vmap[v] = -1

    yield from rec(0, 1)


def edge_maps(pattern: Graph, host: Graph, vmap: Sequence[int]) -> Iterator[tuple[int, ...]]:
    """All injective edge maps compatible with ``vmap``, in lexicographic order."""
    groups: dict[tuple[int, int, int], list[int]] = {}
    for e in range(pattern.n_edges):
        groups.setdefault(pattern.edge_key(e, vmap), []).append(e)
    keys = list(groups)
    choices = [itertools.permutations(host.edge_groups.get(k, ()), len(groups[k])) for k in keys]
    for combo in itertools.product(*choices):
        emap = [0] * pattern.n_edges
        for k, images in zip(keys, combo):
            for e, f in zip(groups[k], images):
                emap[e] = f
        yield tuple(emap)


def first_edge_map(pattern: Graph, host: Graph, vmap: Sequence[int]) -> tuple[int, ...]:
    return next(edge_maps(pattern, host, vmap))


def enumerate_monos(pattern: Graph, host: Graph) -> list[Morphism]:
    """Every mono ``pattern -> host``, ordered by vertex map then edge map."""
    out = []
    for vmap, _ in vertex_embeddings(pattern, host):
        for emap in sorted(edge_maps(pattern, host, vmap)):
            out.append(Morphism(pattern, host, vmap, emap))
    return out


def count_monos(pattern: Graph, host: Graph, deleted: frozenset[int] = frozenset()) -> int:
    return sum(m for _, m in vertex_embeddings(pattern, host, deleted))


def embeds(pattern: Graph, host: Graph) -> bool:
    return next(vertex_embeddings(pattern, host), None) is not None


# --------------------------------------------------------------------------
# canonical forms

@dataclass(frozen=True)
class CanonicalForm:
    key: tuple = field(repr=False)

    @property
    def certificate(self) -> bytes:
        return repr(self.key).encode()


def canonical_form(g: Graph) -> CanonicalForm:
    return CanonicalForm(g.key)


def _graph_code(g: Graph):
    arcs = [(s, u, v, g.signature.directed(s)) for s, u, v in g.edges]
    return (g.signature, canonical_code([(c,) for c in g.colors], arcs))


def canonical_code(colors: Sequence[tuple], arcs: Sequence[tuple[int, int, int, bool]]):
    """Canonical code of a colored multigraph with typed arcs.

    ``colors`` holds comparable tuples; each arc is ``(type, u, v, directed)``.
    The code is the sorted tuple of per-component codes, each of which is the
    lexicographically smallest encoding over all orderings that refine the
    stable coloring.
    """
    n = len(colors)
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for _, u, v, _ in arcs:
        ru, rv = find(u), find(v)
        if ru != rv:
            parent[max(ru, rv)] = min(ru, rv)
    members: dict[int, list[int]] = {}
    for v in range(n):
        members.setdefault(find(v), []).append(v)
    comp_arcs: dict[int, list] = {r: [] for r in members}
    for a in arcs:
        comp_arcs[find(a[1])].append(a)
    codes = []
    for r, vs in members.items():
        if len(vs) == 1 and not comp_arcs[r]:
            codes.append(((colors[vs[0]],), ()))
            continue
        pos = {v: i for i, v in enumerate(vs)}
        local_arcs = [(t, pos[u], pos[v], d) for t, u, v, d in comp_arcs[r]]
        codes.append(_component_code([colors[v] for v in vs], local_arcs))
    return tuple(sorted(codes))


def _component_code(colors: list[tuple], arcs: list[tuple[int, int, int, bool]]):
    n = len(colors)
    nbrs: list[list[tuple[int, int, int]]] = [[] for _ in range(n)]
    for t, u, v, d in arcs:
        if d:
            nbrs[u].append((0, t, v))
            nbrs[v].append((1, t, u))
        else:
            nbrs[u].append((2, t, v))
            nbrs[v].append((2, t, u))
    ranks = {c: i for i, c in enumerate(sorted(set(colors)))}
    cells = _refine([ranks[c] for c in colors], nbrs)

    arc_multiset = sorted((t, u, v, d) for t, u, v, d in arcs)

    def leaf_code(cells):
        order = sorted(range(n), key=lambda v: cells[v])
        pos = [0] * n
        for i, v in enumerate(order):
            pos[v] = i
        enc = []
        for t, u, v, d in arcs:
            a, b = pos[u], pos[v]
            if not d and a > b:
                a, b = b, a
            enc.append((t, a, b, d))
        enc.sort()
        return (tuple(colors[v] for v in order), tuple(enc))

    def twins(u, v):
        swap = {u: v, v: u}
        moved = []
        for t, a, b, d in arc_multiset:
            if a in swap or b in swap:
                a2, b2 = swap.get(a, a), swap.get(b, b)
                if not d and a2 > b2:
                    a2, b2 = b2, a2
                x, y = (a, b) if d or a <= b else (b, a)
                moved.append(((t, x, y, d), (t, a2, b2, d)))
        before = sorted(m[0] for m in moved)
        after = sorted(m[1] for m in moved)
        return before == after

    best = None

    def search(cells):
        nonlocal best
        counts: dict[int, int] = {}
        for c in cells:
            counts[c] = counts.get(c, 0) + 1
        split = [c for c, k in counts.items() if k > 1]
        if not split:
            code = leaf_code(cells)
            if best is None or code < best:
                best = code
            return
        target = min(split)
        cell_vs = [v for v in range(n) if cells[v] == target]
        reps: list[int] = []
        for v in cell_vs:
            if any(twins(r, v) for r in reps):
                continue
            reps.append(v)
        for v in reps:
            new = [2 * c + (1 if c == target and w != v else 0) for w, c in enumerate(cells)]
            search(_refine(new, nbrs))

    search(cells)
    return best


def _refine(cells: list[int], nbrs) -> list[int]:
    """Colour refinement to the coarsest stable partition, ranks dense."""
    n_cls = len(set(cells))
    while True:
        sigs = [
            (cells[v], tuple(sorted((k, t, cells[w]) for k, t, w in nbrs[v])))
            for v in range(len(cells))
        ]
        order = {s: i for i, s in enumerate(sorted(set(sigs)))}
        new = [order[s] for s in sigs]
        if len(order) == n_cls:
            return new
        cells, n_cls = new, len(order)
