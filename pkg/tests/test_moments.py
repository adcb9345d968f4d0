import math
import random
from fractions import Fraction

import numpy as np
import pytest
import sympy

from rasir.algebra import commutator, product
from rasir.graph import Graph
from rasir.model import load_model
from rasir.moments import (
    ClosedFormOracle,
    ClosureError,
    analyze_adjoint,
    check_polynomial_jump_closure,
    derive_differential_operator,
    eval_oracle,
    integrate_odes,
    moment_odes,
    pure_initial_moments,
)
from rasir.state import State, evaluate_observable, project, represent

k0, k1 = sympy.symbols("kappa0 kappa1", positive=True)
beta, tau = sympy.symbols("beta tau", positive=True)


@pytest.fixture(scope="module")
def flip():
    return load_model("voter-flip")


@pytest.fixture(scope="module")
def bd():
    return load_model("birth-death")


@pytest.fixture(scope="module")
def tmt():
    return load_model("tmt")


def forms(analysis):
    return {j.name: [tuple(c.form.coefficients) for c in j.components] for j in analysis.jumps}


def test_vertex_observables_conserved(flip):
    a = analyze_adjoint(flip.hamiltonian(), flip.select(["vertices"]), flip.constraint)
    assert a.all_eigen
    assert all(all(x == 0 for f in fs for x in f) for fs in forms(a).values())


def test_edge_eigenvalues(flip):
    a = analyze_adjoint(flip.hamiltonian(), flip.select(["edges"]), flip.constraint)
    f = forms(a)
    assert f["h0w"] == [(1, -1, 0)]
    assert f["h1b"] == [(0, -1, 1)]
    assert f["h0b"] == [(0, 0, 0)] and f["h1w"] == [(0, 0, 0)]


def test_edge_commutator_identity(flip):
    """[λ·O, κ h] = κ0(λww − λwb) h0w + κ1(λbb − λwb) h1b for any λ."""
    lam = [Fraction(3), Fraction(-2), Fraction(5, 7)]
    obs = flip.select(["edges"])
    lo = obs[0].element().scale(lam[0]) + obs[1].element().scale(lam[1]) + obs[2].element().scale(lam[2])
    kap = {"h0w": Fraction(1, 2), "h0b": Fraction(1, 2), "h1w": Fraction(1, 18), "h1b": Fraction(1, 18)}
    h = sum((flip.element(n).scale(c) for n, c in kap.items()), flip.element("h0w").scale(0))
    want = flip.element("h0w").scale(kap["h0w"] * (lam[0] - lam[1])) + flip.element("h1b").scale(kap["h1b"] * (lam[2] - lam[1]))
    assert commutator(lo, h) == want


def test_edge_observables_commute(flip):
    obs = [o.element() for o in flip.select(["edges"])]
    for a in obs:
        for b in obs:
            assert product(a, b) == product(b, a)


def test_recolor_rules_break_closure():
    m = load_model("voter")
    a = analyze_adjoint(m.hamiltonian(), m.select(None), m.constraint, depth_limit=1)
    bad = {j.name: j for j in a.jumps if not j.eigen}
    assert set(bad) == {"h01", "h10"}
    assert bad["h01"].offending_observable == "O_ww"


def three_white_path(sig):
    w = sig.sort_index("w")
    e = sig.sort_index("e")
    return Graph(sig, (0, 0, 0), ((w, 0, 0), (w, 1, 1), (w, 2, 2), (e, 0, 1), (e, 1, 2)))


def test_non_closure_names_white_path():
    m = load_model("voter")
    rep = check_polynomial_jump_closure(m.hamiltonian(), m.select(None), m.constraint, depth_limit=1)
    assert not rep.closed
    target = three_white_path(m.signature).key
    assert any(t.pattern.key == target for _, o in rep.offenders for t in o.combo)


def test_flip_closure(flip):
    rep = check_polynomial_jump_closure(flip.hamiltonian(), flip.select(["edges"]), flip.constraint)
    assert not rep.closed  # needs the vertex counts
    rep = check_polynomial_jump_closure(flip.hamiltonian(), flip.select(["O_ww", "O_wb", "O_bb", "O_w", "O_b"]), flip.constraint)
    assert rep.closed
    frozen = flip.frozen_values(["O_ww", "O_wb", "O_bb"])
    assert check_polynomial_jump_closure(flip.hamiltonian(), flip.select(["edges"]), flip.constraint, frozen=frozen).closed


def test_frozen_must_be_conserved(flip):
    frozen = {"O_wb": (flip.observables["O_wb"], Fraction(50))}
    rep = check_polynomial_jump_closure(flip.hamiltonian(), flip.select(["O_ww", "O_bb"]), flip.constraint, frozen=frozen)
    assert not rep.closed


def test_birth_death_operator(bd):
    d = derive_differential_operator(bd.hamiltonian(), bd.select(None), bd.constraint)
    assert d.text() == "β(e^λ−1) + τ(e^{−λ}−1)∂λ"
    assert d.term_dict() == {((1,), (0,)): beta, ((0,), (0,)): -beta + 0 * tau, ((-1,), (1,)): tau, ((0,), (1,)): -tau}
    assert "\\partial_{\\lambda}" in d.latex()
    js = d.to_json()
    assert js["observables"] == ["n"] and len(js["terms"]) == 4


def test_flip_operator_frozen(flip):
    frozen = flip.frozen_values(["O_ww", "O_wb", "O_bb"])
    obs = flip.select(["edges"])
    d = derive_differential_operator(flip.hamiltonian(), obs, flip.constraint, frozen=frozen)
    nw, nb = 5, 25
    big_k = k0 * (nw - 1) + k1 * (nb - 1)
    kb0, kb1 = k0 * (nw - 1) / big_k, k1 * (nb - 1) / big_k
    want = {
        ((1, -1, 0), (0, 1, 0)): big_k * kb0,
        ((0, -1, 1), (0, 1, 0)): big_k * kb1,
        ((0, 0, 0), (0, 1, 0)): -big_k * (kb0 + kb1),
    }
    got = d.term_dict()
    assert set(got) == set(want)
    for key, val in want.items():
        assert sympy.simplify(got[key] - val) == 0


def test_closure_required(flip):
    with pytest.raises(ClosureError):
        derive_differential_operator(flip.hamiltonian(), flip.select(["edges"]), flip.constraint)


def test_tmt_eigen_structure(tmt):
    obs = tmt.select(["full"])
    names = [o.name for o in obs]
    a = analyze_adjoint(tmt.hamiltonian(), obs, tmt.constraint)
    assert a.all_eigen
    idx = {n: i for i, n in enumerate(names)}

    def vec(**kw):
        v = [0] * len(names)
        for k, x in kw.items():
            v[idx[k]] = x
        return tuple(v)

    f = forms(a)
    assert sorted(f["D"]) == sorted([vec(o_tkt=-1, o_dtkt=1, o_dot1=-1, o_d1=1), vec(o_tkt=-1, o_dtkt=1, o_dotg=-1, o_dg=1)])
    assert sorted(f["G"]) == [vec(o_led=1)]
    assert sorted(f["T"]) == sorted([vec(o_tkt=1, o_t=1, o_led=2, o_dot1=1)])
    assert sorted(f["P"]) == sorted([vec(o_tkt=2, o_t=1, o_led=2, o_dotg=2)])
    assert f["R"] == [vec(o_dot1=-1, o_dotg=1)]


def test_tmt_closure_polynomials(tmt):
    obs = tmt.select(None)
    rep = check_polynomial_jump_closure(tmt.hamiltonian(), obs, tmt.constraint, tmt.identities)
    assert rep.closed
    one, g = sympy.symbols("o_dot1 o_dotg")
    polys = {}
    for j, comp, expr in rep.polynomials:
        polys.setdefault(j.name, []).append(expr)
    assert sorted(map(str, polys["D"])) == sorted(map(str, [one, g]))
    assert polys["R"] == [one * g]
    assert sorted(map(str, polys["T"])) == sorted(map(str, [one + g]))


def test_tmt_operator_cross_term(tmt):
    obs = tmt.select(None)
    d = derive_differential_operator(tmt.hamiltonian(), obs, tmt.constraint, tmt.identities)
    names = d.names
    i1, ig = names.index("o_dot1"), names.index("o_dotg")
    cross = [t for t in d.terms if t.k[i1] == 1 and t.k[ig] == 1]
    assert len(cross) == 2
    r = sympy.Symbol("r_R", positive=True)
    assert {t.coeff for t in cross} == {r, -r}
    assert "∂λ_o_dot1∂λ_o_dotg" in d.text()


def test_moment_odes_birth_death(bd):
    d = derive_differential_operator(bd.hamiltonian(), bd.select(None), bd.constraint)
    sys1 = moment_odes(d, 1)
    assert sys1.closed
    assert sys1.rhs[(1,)] == {(0,): beta, (1,): -tau}
    grid = [0.5, 1.0, 2.0]
    sol = integrate_odes(sys1, [10.0], grid, {"beta": 2, "tau": 1})
    for t, row in zip(grid, sol):
        assert abs(row[0] - (10 * math.exp(-t) + 2 * (1 - math.exp(-t)))) < 1e-8


def test_zero_rhs_constant(flip):
    d = derive_differential_operator(flip.hamiltonian(), flip.select(["vertices"]), flip.constraint)
    assert d.terms == [] and d.text() == "0"
    sys2 = moment_odes(d, 2)
    assert all(not r for r in sys2.rhs.values())
    init = pure_initial_moments(sys2, [5, 25])
    sol = integrate_odes(sys2, init, [1.0, 3.0], {})
    assert np.allclose(sol, init)


def test_flip_moment_odes(flip):
    frozen = flip.frozen_values(["O_ww", "O_wb", "O_bb"])
    d = derive_differential_operator(flip.hamiltonian(), flip.select(["edges"]), flip.constraint, frozen=frozen)
    sys1 = moment_odes(d, 1)
    big_k = 4 * k0 + 24 * k1
    wb, ww = (0, 1, 0), (1, 0, 0)
    assert sympy.simplify(sys1.rhs[wb][wb] + big_k) == 0
    assert sympy.simplify(sys1.rhs[ww][wb] - 4 * k0) == 0
    params = flip.parameters
    kval = 4 * params["kappa0"] + 24 * params["kappa1"]
    sol = integrate_odes(sys1, pure_initial_moments(sys1, [0, 50, 0]), [0.5, 1.0], params)
    idx = sys1.variables.index(wb)
    for t, row in zip([0.5, 1.0], sol):
        assert abs(row[idx] - 50 * math.exp(-kval * t)) < 1e-8


def test_not_closed_integration_refused(bd):
    d = derive_differential_operator(bd.hamiltonian(), bd.select(None), bd.constraint)
    s = moment_odes(d, 1)
    s.closed = False
    with pytest.raises(ClosureError):
        integrate_odes(s, [1.0], [1.0])


def test_first_order_matches_direct_computation(flip):
    """d⟨O⟩/dt from the operator equals ⟨|O H|X⟩ on pure states."""
    obs = flip.select(["O_ww", "O_wb", "O_bb", "O_w", "O_b"])
    d = derive_differential_operator(flip.hamiltonian(), obs, flip.constraint)
    sys1 = moment_odes(d, 1)
    gen = flip.hamiltonian().generator(flip.parameters)
    subs = {sympy.Symbol(k, positive=True): sympy.Rational(str(v)) for k, v in flip.parameters.items()}
    rng = random.Random(3)
    for _ in range(6):
        n = rng.randint(2, 6)
        colors = tuple(rng.randrange(2) for _ in range(n))
        edges = tuple((0, rng.randrange(n), rng.randrange(n)) for _ in range(rng.randint(0, 5)))
        edges = tuple(e for e in edges if e[1] != e[2])
        g = Graph(flip.signature, colors, edges)
        vals = [evaluate_observable(o, g) for o in obs]
        after = represent(gen, State.pure(g))
        for i, o in enumerate(obs):
            direct = project(represent(o.element(), after))
            n_idx = tuple(1 if j == i else 0 for j in range(len(obs)))
            pred = sympy.Integer(0)
            for m, c in sys1.rhs[n_idx].items():
                pred += c.subs(subs) * math.prod(sympy.Rational(str(v)) ** e for v, e in zip(vals, m))
            assert sympy.Rational(str(direct)) == sympy.nsimplify(pred)


def _apply_operator(d, m_expr, lams, params):
    subs = {sympy.Symbol(k, positive=True): v for k, v in params.items()}
    total = 0
    for t in d.terms:
        term = m_expr
        for lam, k in zip(lams, t.k):
            term = sympy.diff(term, lam, k) if k else term
        shift = sum(sympy.Rational(mu.numerator, mu.denominator) * lam for mu, lam in zip(t.mu, lams))
        total += sympy.sympify(t.coeff).subs(subs) * sympy.exp(shift) * term
    return total


def test_operator_annihilates_birth_death_oracle(bd):
    d = derive_differential_operator(bd.hamiltonian(), bd.select(None), bd.constraint)
    lam, t = sympy.symbols("lam t")
    b, ta, n0 = 2, 1, 10
    decay = sympy.exp(-ta * t)
    m = sympy.exp(sympy.Rational(b, ta) * (1 - decay) * (sympy.exp(lam) - 1)) * (1 + decay * (sympy.exp(lam) - 1)) ** n0
    resid = sympy.diff(m, t) - _apply_operator(d, m, [lam], {"beta": b, "tau": ta})
    f = sympy.lambdify((t, lam), resid)
    for tv in (0.1, 0.7, 2.0):
        for lv in (-0.5, 0.0, 0.3, 0.5):
            assert abs(f(tv, lv)) < 1e-6
    o = ClosedFormOracle("birth-death-emgf", {"beta": b, "tau": ta, "N": n0})
    assert abs(eval_oracle(o, 0.7, 0.3) - float(m.subs({t: 0.7, lam: 0.3}))) < 1e-9


def test_operator_annihilates_voter_oracle(flip):
    frozen = flip.frozen_values(["O_ww", "O_wb", "O_bb"])
    d = derive_differential_operator(flip.hamiltonian(), flip.select(["edges"]), flip.constraint, frozen=frozen)
    lww, lwb, lbb, t = sympy.symbols("lww lwb lbb t")
    kap0, kap1 = sympy.Rational(1, 2), sympy.Rational(1, 18)
    big_k = 4 * kap0 + 24 * kap1
    decay = sympy.exp(-big_k * t)
    inner = decay * sympy.exp(lwb) + (1 - decay) * (4 * kap0 / big_k * sympy.exp(lww) + 24 * kap1 / big_k * sympy.exp(lbb))
    m = sympy.exp(2 * lww + 3 * lbb) * inner**7
    resid = sympy.diff(m, t) - _apply_operator(d, m, [lww, lwb, lbb], flip.parameters)
    f = sympy.lambdify((t, lww, lwb, lbb), resid)
    for tv in (0.1, 1.0):
        for lv in ((0.1, -0.2, 0.3), (-0.4, 0.2, 0.0)):
            assert abs(f(tv, *lv)) < 1e-6


def test_oracle_examples():
    o = ClosedFormOracle("birth-death-emgf", {"beta": 2, "tau": 1, "N": 10})
    for t in (0.0, 1.0, 5.0):
        assert eval_oracle(o, t, 0.0) == pytest.approx(1.0)
    assert eval_oracle(o, 60.0, 0.4) == pytest.approx(math.exp(2 * (math.exp(0.4) - 1)))
    pgf = ClosedFormOracle("birth-death-pgf", {"beta": 2, "tau": 1, "N": 0})
    assert eval_oracle(pgf, 60.0, 0.5) == pytest.approx(math.exp(2 * (0.5 - 1)))
    v = ClosedFormOracle("voter-edge-emgf", {"kappa0": 0.5, "kappa1": 1 / 18, "Nw": 5, "Nb": 25, "Nww": 1, "Nwb": 3, "Nbb": 2})
    lam = (0.1, -0.3, 0.2)
    assert eval_oracle(v, 0.0, lam) == pytest.approx(math.exp(0.1 * 1 - 0.3 * 3 + 0.2 * 2))
    with pytest.raises(ValueError):
        ClosedFormOracle("nope", {})
    with pytest.raises(ValueError):
        eval_oracle(ClosedFormOracle("birth-death-emgf", {"beta": 1, "tau": 0}), 1.0, 0.0)
