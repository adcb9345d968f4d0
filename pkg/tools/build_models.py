"""Regenerate the bundled model files under src/rasir/models/."""

import json
from pathlib import Path

OUT = Path(__file__).resolve().parents[1] / "src" / "rasir" / "models"


def graph(vertices, edges=()):
    return {
        "vertices": [{"id": v, "color": c} for v, c in vertices],
        "edges": [{"id": e, "sort": s, "ends": [a, b]} for e, s, a, b in edges],
    }


def rule(name, out, ctx, inp, rate=None):
    """Context ids are reused verbatim in output and input."""
    ids = [v["id"] for v in ctx["vertices"]] + [e["id"] for e in ctx["edges"]]
    r = {"name": name, "output": out, "context": ctx, "input": inp,
         "o_map": {i: i for i in ids}, "i_map": {i: i for i in ids}}
    if rate is not None:
        r["rate"] = rate
    return r


def obs(name, pattern, core_vertices, core_edges=(), coeff="1"):
    return {"name": name, "terms": [{"coeff": coeff, "pattern": pattern,
                                     "core_vertices": list(core_vertices), "core_edges": list(core_edges)}]}


def model(name, signature, **rest):
    return {"$schema": "rasir-model/1", "name": name, "signature": signature, **rest}


EMPTY = graph([])


def birth_death():
    sig = {"vertex_colors": ["X"], "edge_sorts": []}
    x = graph([("x", "X")])
    return model(
        "birth-death", sig,
        parameters={"beta": 2, "tau": 1},
        rules=[rule("birth", x, EMPTY, EMPTY, "beta"), rule("death", EMPTY, EMPTY, x, "tau")],
        observables=[obs("n", x, ["x"])],
        initial_state={"graph": graph([(f"x{i}", "X") for i in range(10)])},
    )


def hw():
    sig = {"vertex_colors": ["X"], "edge_sorts": []}
    x = graph([("x", "X")])
    return model(
        "hw", sig,
        rules=[rule("x", EMPTY, EMPTY, x), rule("xdag", x, EMPTY, EMPTY)],
        observables=[obs("n", x, ["x"])],
    )


def _mixed_initial(nw, nb, n_ww, n_wb, n_bb, color_of):
    """Agents ``w0..`` and ``b0..`` with edges spread round-robin."""
    ws = [f"w{i}" for i in range(nw)]
    bs = [f"b{i}" for i in range(nb)]
    pairs = []
    pairs += [(ws[i % nw], ws[(i + 1) % nw]) for i in range(n_ww)]
    pairs += [(ws[i % nw], bs[i % nb]) for i in range(n_wb)]
    pairs += [(bs[i % nb], bs[(i + 1) % nb]) for i in range(n_bb)]
    return ws, bs, pairs


def voter_flip():
    sig = {"vertex_colors": ["w", "b"], "edge_sorts": [{"name": "e", "directed": False}]}
    rules = []
    for i, own in ((0, "w"), (1, "b")):
        other = "b" if own == "w" else "w"
        for c in ("w", "b"):
            ctx = graph([("u", c), ("a", own), ("d", other)])
            inp = graph([("u", c), ("a", own), ("d", other)], [("e1", "e", "a", "d")])
            out = graph([("u", c), ("a", own), ("d", other)], [("e2", "e", "a", "u")])
            rules.append(rule(f"h{i}{c}", out, ctx, inp, f"kappa{i}"))
    ws, bs, pairs = _mixed_initial(5, 25, 0, 50, 0, None)
    init = graph([(w, "w") for w in ws] + [(b, "b") for b in bs],
                 [(f"e{k}", "e", a, b) for k, (a, b) in enumerate(pairs)])
    return model(
        "voter-flip", sig,
        parameters={"kappa0": "1/2", "kappa1": "1/18"},
        rules=rules,
        observables=[
            obs("O_w", graph([("x", "w")]), ["x"]),
            obs("O_b", graph([("x", "b")]), ["x"]),
            obs("O_ww", graph([("x", "w"), ("y", "w")], [("e", "e", "x", "y")]), ["x", "y"], coeff="1/2"),
            obs("O_wb", graph([("x", "w"), ("y", "b")], [("e", "e", "x", "y")]), ["x", "y"]),
            obs("O_bb", graph([("x", "b"), ("y", "b")], [("e", "e", "x", "y")]), ["x", "y"], coeff="1/2"),
        ],
        observable_sets={"default": ["O_ww", "O_wb", "O_bb"], "edges": ["O_ww", "O_wb", "O_bb"],
                         "vertices": ["O_w", "O_b"]},
        conserved=["O_w", "O_b"],
        initial_state={"graph": init},
    )


def voter():
    """Opinions are marker loops so recolouring keeps incident edges."""
    sig = {"vertex_colors": ["agent"],
           "edge_sorts": [{"name": "e", "directed": False}, {"name": "w", "directed": False},
                          {"name": "b", "directed": False}]}

    def agents(spec, edges=()):
        vs = [(v, "agent") for v, _ in spec]
        loops = [(f"l{v}", op, v, v) for v, op in spec]
        return graph(vs, loops + list(edges))

    def bare(names):
        return graph([(v, "agent") for v in names])

    rules = []
    for i, own in ((0, "w"), (1, "b")):
        other = "b" if own == "w" else "w"
        for c in ("w", "b"):
            spec = [("u", c), ("a", own), ("d", other)]
            inp = agents(spec, [("e1", "e", "a", "d")])
            out = agents(spec, [("e2", "e", "a", "u")])
            rules.append(rule(f"h{i}{c}", out, bare(["u", "a", "d"]), inp, f"kappa{i}"))
    wb = [("a", "w"), ("d", "b")]
    rules.append(rule("h01", agents([("a", "w"), ("d", "w")], [("e", "e", "a", "d")]), bare(["a", "d"]),
                      agents(wb, [("e", "e", "a", "d")]), "kappa01"))
    rules.append(rule("h10", agents([("a", "b"), ("d", "b")], [("e", "e", "a", "d")]), bare(["a", "d"]),
                      agents(wb, [("e", "e", "a", "d")]), "kappa10"))

    def edge_obs(name, c1, c2, coeff):
        return obs(name, agents([("x", c1), ("y", c2)], [("e", "e", "x", "y")]), ["x", "y"], coeff=coeff)

    ws, bs, pairs = _mixed_initial(3, 3, 1, 4, 1, None)
    init = agents([(w, "w") for w in ws] + [(b, "b") for b in bs],
                  [(f"e{k}", "e", a, b) for k, (a, b) in enumerate(pairs)])
    double = [graph([("x", "agent")], [("l1", p, "x", "x"), ("l2", q, "x", "x")])
              for p, q in (("w", "w"), ("w", "b"), ("b", "b"))]
    return model(
        "voter", sig,
        parameters={"kappa0": "1/2", "kappa1": "1/18", "kappa01": "1/10", "kappa10": "1/10"},
        rules=rules,
        observables=[
            obs("O_w", agents([("x", "w")]), ["x"]),
            obs("O_b", agents([("x", "b")]), ["x"]),
            edge_obs("O_ww", "w", "w", "1/2"),
            edge_obs("O_wb", "w", "b", "1"),
            edge_obs("O_bb", "b", "b", "1/2"),
        ],
        observable_sets={"default": ["O_ww", "O_wb", "O_bb"], "edges": ["O_ww", "O_wb", "O_bb"],
                         "vertices": ["O_w", "O_b"]},
        conserved=[],
        forbidden_patterns=double,
        initial_state={"graph": init},
    )


def tmt():
    sig = {"vertex_colors": ["tx", "tkt", "dtkt", "led"], "edge_sorts": [{"name": "link", "directed": False}]}
    L = "link"
    site = graph([("t", "tx"), ("k", "tkt")], [("s", L, "t", "k")])
    tx_only = graph([("t", "tx")])
    rules = [
        rule("D", graph([("t", "tx"), ("k2", "dtkt")], [("s2", L, "t", "k2")]), tx_only, site, "r_D"),
        rule("G", graph([("t", "tx"), ("k2", "tkt"), ("l", "led")], [("s2", L, "t", "k2")]), tx_only, site, "r_G"),
        rule("T", graph([("t", "tx"), ("k2", "tkt"), ("n", "tx"), ("nk", "tkt"), ("l1", "led"), ("l2", "led")],
                        [("s2", L, "t", "k2"), ("ns", L, "n", "nk")]), tx_only, site, "r_T"),
        rule("P", graph([("t", "tx"), ("k2", "tkt"), ("n", "tx"), ("nk1", "tkt"), ("nk2", "tkt"),
                         ("l1", "led"), ("l2", "led")],
                        [("s2", L, "t", "k2"), ("ns1", L, "n", "nk1"), ("ns2", L, "n", "nk2")]), tx_only, site, "r_P"),
    ]
    pair_in = graph([("t1", "tx"), ("k1", "tkt"), ("t2", "tx"), ("k2", "tkt")],
                    [("s1", L, "t1", "k1"), ("s2", L, "t2", "k2")])
    pair_out = graph([("t1n", "tx"), ("t2", "tx"), ("k1n", "tkt"), ("k2n", "tkt")],
                     [("s1n", L, "t2", "k1n"), ("s2n", L, "t2", "k2n")])
    rules.append(rule("R_any", pair_out, graph([("t2", "tx")]), pair_in))
    pair_out_all_new = graph([("t1n", "tx"), ("t2n", "tx"), ("k1n", "tkt"), ("k2n", "tkt")],
                             [("s1n", L, "t2n", "k1n"), ("s2n", L, "t2n", "k2n")])
    rules.append(rule("R_one", pair_out_all_new, EMPTY, pair_in))
    dsite = graph([("t", "tx"), ("k", "dtkt")], [("s", L, "t", "k")])
    init = graph([("t0", "tx"), ("k0", "tkt"), ("t1", "tx"), ("k1", "tkt"), ("k2", "tkt")],
                 [("s0", L, "t0", "k0"), ("s1", L, "t1", "k1"), ("s2", L, "t1", "k2")])
    return model(
        "tmt", sig,
        parameters={"r_D": "1/10", "r_G": 1, "r_T": "3/10", "r_P": "1/5", "r_R": "1/2"},
        rules=rules,
        jump_terms=[{"name": "R", "rate": "r_R",
                     "terms": [{"rule": "R_any", "coeff": "1"}, {"rule": "R_one", "coeff": "-1"}]}],
        observables=[
            obs("o_tkt", graph([("x", "tkt")]), ["x"]),
            obs("o_dtkt", graph([("x", "dtkt")]), ["x"]),
            obs("o_t", graph([("x", "tx")]), ["x"]),
            obs("o_led", graph([("x", "led")]), ["x"]),
            obs("o_dot", site, ["t"]),
            obs("o_dot1", site, []),
            obs("o_d", dsite, ["t"]),
            obs("o_d1", dsite, []),
        ],
        derived_observables=[
            {"name": "o_dotg", "terms": [{"observable": "o_dot", "coeff": "1"}, {"observable": "o_dot1", "coeff": "-1"}]},
            {"name": "o_dg", "terms": [{"observable": "o_d", "coeff": "1"}, {"observable": "o_d1", "coeff": "-1"}]},
        ],
        observable_sets={
            "default": ["o_t", "o_led", "o_dot1", "o_dotg", "o_d1", "o_dg"],
            "full": ["o_tkt", "o_dtkt", "o_t", "o_led", "o_dot1", "o_dotg", "o_d1", "o_dg"],
            "vertices": ["o_tkt", "o_dtkt", "o_t", "o_led"],
            "edges": ["o_dot1", "o_dotg", "o_d1", "o_dg"],
        },
        observable_identities=[{"terms": [{"observable": "o_tkt", "coeff": "1"}, {"observable": "o_dot", "coeff": "-1"}]},
                               {"terms": [{"observable": "o_dtkt", "coeff": "1"}, {"observable": "o_d", "coeff": "-1"}]}],
        forbidden_patterns=[
            graph([("a", "tx"), ("k", "tkt"), ("b", "tx")], [("x", L, "a", "k"), ("y", L, "b", "k")]),
            graph([("a", "tx"), ("k", "dtkt"), ("b", "tx")], [("x", L, "a", "k"), ("y", L, "b", "k")]),
        ],
        initial_state={"graph": init},
    )


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    for name, build in (("birth-death", birth_death), ("hw", hw), ("voter-flip", voter_flip),
                        ("voter", voter), ("tmt", tmt)):
        (OUT / f"{name}.json").write_text(json.dumps(build(), indent=1) + "\n")


if __name__ == "__main__":
    main()
