"""Adjoint analysis, jump-closure checks, EMGF operators and moment equations."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np
import sympy

from .algebra import ConstraintSet, RuleAlgebraElement, commutator, reduce, BudgetExceeded
from .state import (
    Decomposition,
    Hamiltonian,
    Observable,
    connected_decomposition,
    jump_closure,
)


class ClosureError(RuntimeError):
    pass


def _rat(x) -> sympy.Rational:
    x = Fraction(x)
    return sympy.Rational(x.numerator, x.denominator)


def _frac(x) -> Fraction:
    x = sympy.Rational(x)
    return Fraction(int(x.p), int(x.q))


@dataclass(frozen=True)
class LinearForm:
    """``ℓ(λ) = Σ η_i λ_i`` over observable indices."""

    coefficients: tuple[Fraction, ...]

    def __getitem__(self, i):
        return self.coefficients[i]

    def is_zero(self) -> bool:
        return not any(self.coefficients)

    def is_integral(self) -> bool:
        return all(c.denominator == 1 for c in self.coefficients)

    def expr(self, lambdas: Sequence[sympy.Symbol]) -> sympy.Expr:
        return sum((_rat(c) * l for c, l in zip(self.coefficients, lambdas)), sympy.Integer(0))

    def text(self, names: Sequence[str]) -> str:
        return _linear_text(self.coefficients, names)


def _linear_text(coeffs, names) -> str:
    parts = []
    for c, n in zip(coeffs, names):
        if not c:
            continue
        mag = abs(c)
        body = n if mag == 1 else f"{mag}{n}"
        if not parts:
            parts.append(("−" if c < 0 else "") + body)
        else:
            parts.append(("−" if c < 0 else "+") + body)
    return "".join(parts) if parts else "0"


@dataclass
class EigenComponent:
    element: RuleAlgebraElement
    form: LinearForm


@dataclass
class JumpAnalysis:
    name: str
    rate: sympy.Expr
    eigen: bool
    components: list[EigenComponent] = field(default_factory=list)
    generated: list[RuleAlgebraElement] = field(default_factory=list)
    offending: RuleAlgebraElement | None = None
    offending_observable: str = ""
    reason: str = ""


@dataclass
class AdjointAnalysis:
    names: list[str]
    jumps: list[JumpAnalysis]

    @property
    def all_eigen(self) -> bool:
        return all(j.eigen for j in self.jumps)


def _coords(vecs: list[RuleAlgebraElement], w: RuleAlgebraElement):
    """Coordinates of ``w`` in the span of ``vecs`` or ``None``."""
    keys = []
    for v in vecs + [w]:
        for k in v.terms:
            if k not in keys:
                keys.append(k)
    if not vecs:
        return None if w else []
    a = sympy.Matrix(len(keys), len(vecs), lambda i, j: _rat(vecs[j].terms.get(keys[i], (0,))[0]))
    b = sympy.Matrix(len(keys), 1, lambda i, _: _rat(w.terms.get(keys[i], (0,))[0]))
    try:
        sol, params = a.gauss_jordan_solve(b)
    except ValueError:
        return None
    if params.shape[0]:
        sol = sol.subs({p: 0 for p in params})
    return [_frac(x) for x in sol]


def _combine(vecs, coeffs) -> RuleAlgebraElement:
    out = RuleAlgebraElement()
    for v, c in zip(vecs, coeffs):
        if c:
            out = out + v.scale(c)
    return out


def _analyze_one(name, rate, h, obs_elems, names, constraint, depth_limit) -> JumpAnalysis:
    h = reduce(h, constraint)
    if not h:
        return JumpAnalysis(name, rate, True, [], reason="acts trivially on constrained states")
    vecs = [h]
    depth = [0]
    columns: list[list[list[Fraction]]] = [[] for _ in obs_elems]  # per obs, per vector
    first = None  # the earliest commutator that escaped the span, for diagnostics
    i_vec = 0
    while i_vec < len(vecs):
        v = vecs[i_vec]
        for i, a in enumerate(obs_elems):
            w = reduce(commutator(a, v), constraint)
            c = _coords(vecs, w)
            if c is None:
                if first is None:
                    new = [r for _, r in w if all(r.key not in u.terms for u in vecs)]
                    off = RuleAlgebraElement.from_pairs((w.terms[r.key][0], r) for r in new) if new else w
                    first = (off, names[i])
                if depth[i_vec] + 1 > depth_limit:
                    return JumpAnalysis(
                        name, rate, False, generated=vecs, offending=first[0],
                        offending_observable=first[1],
                        reason=f"commutator with {names[i]} leaves the span generated up to depth {depth_limit}",
                    )
                vecs.append(w)
                depth.append(depth[i_vec] + 1)
                c = [Fraction(0)] * (len(vecs) - 1) + [Fraction(1)]
            columns[i].append(c)
        i_vec += 1
    m = len(vecs)
    mats = []
    for i in range(len(obs_elems)):
        mat = sympy.zeros(m, m)
        for col, c in enumerate(columns[i]):
            for row, val in enumerate(c):
                mat[row, col] = _rat(val)
        mats.append(mat)
    comps = _joint_eigen(mats, m)
    if comps is None:
        return JumpAnalysis(name, rate, False, generated=vecs, offending=vecs[-1] if m > 1 else h,
                            reason="adjoint action is not diagonalisable with rational eigenvalues")
    out = []
    for vec, etas in comps:
        elem = _combine(vecs, [_frac(x) for x in vec])
        out.append(EigenComponent(elem, LinearForm(tuple(_frac(e) for e in etas))))
    # exact certificate: recompute every commutator at rule level
    for comp in out:
        for i, a in enumerate(obs_elems):
            lhs = reduce(commutator(a, comp.element), constraint)
            if lhs != reduce(comp.element.scale(comp.form[i]), constraint):
                raise AssertionError("eigen certificate failed verification")
    return JumpAnalysis(name, rate, True, out, generated=vecs)


def _joint_eigen(mats, m):
    """Split the first basis vector into joint eigenvectors of commuting matrices."""
    if m == 1:
        return [([1], [mat[0, 0] for mat in mats])]
    e1 = sympy.zeros(m, 1)
    e1[0] = 1
    for attempt in range(5):
        weights = [sympy.Integer(p) for p in _weights(len(mats), attempt)]
        comb = sum((w * mat for w, mat in zip(weights, mats)), sympy.zeros(m, m))
        try:
            ev = comb.eigenvects()
        except Exception:
            return None
        if any(not val.is_rational for val, _, _ in ev):
            return None
        basis = [vec for _, _, vs in ev for vec in vs]
        if len(basis) < m:
            return None
        p = sympy.Matrix.hstack(*basis)
        coeffs = p.solve(e1)
        comps = []
        pos = 0
        ok = True
        for val, _, vs in ev:
            part = sympy.zeros(m, 1)
            for vec in vs:
                part += coeffs[pos] * vec
                pos += 1
            if all(x == 0 for x in part):
                continue
            etas = []
            for mat in mats:
                image = mat * part
                idx = next(i for i in range(m) if part[i] != 0)
                eta = image[idx] / part[idx]
                if image != eta * part:
                    ok = False
                    break
                etas.append(eta)
            if not ok:
                break
            comps.append((list(part), etas))
        if ok:
            return comps
    return None


def _weights(n, attempt):
    primes = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47]
    return [primes[(i + attempt) % len(primes)] ** (i + 1) for i in range(n)]


def analyze_adjoint(H: Hamiltonian, obs: Sequence[Observable], constraint: ConstraintSet | None = None,
                    depth_limit: int = 3) -> AdjointAnalysis:
    constraint = constraint if constraint is not None else H.constraint
    elems = [o.element() for o in obs]
    names = [o.name or f"O{i}" for i, o in enumerate(obs)]
    jumps = []
    for idx, j in enumerate(H.jump_terms):
        try:
            jumps.append(_analyze_one(j.name or f"h{idx}", j.rate, j.element, elems, names, constraint, depth_limit))
        except BudgetExceeded as exc:
            jumps.append(JumpAnalysis(j.name or f"h{idx}", j.rate, False, reason=str(exc)))
    return AdjointAnalysis(names, jumps)


# --------------------------------------------------------------------------
# expressing decompositions in the declared observable set

@dataclass
class Identity:
    """Declared linear relation ``Σ c_i O_i =_S 0`` among named observables."""

    terms: list[tuple[Fraction, Observable]]

    def observable(self) -> Observable:
        out = RuleAlgebraElement()
        for c, o in self.terms:
            out = out + o.element().scale(c)
        return Observable.from_element(out)


class _Basis:
    """Linear coordinates of connected observables in the declared set."""

    def __init__(self, obs, constraint, identities=(), frozen=None):
        self.obs = list(obs)
        self.frozen = dict(frozen or {})
        self.constraint = constraint
        self.columns = []
        for o in self.obs:
            self.columns.append(self._linear(o))
        self.identity_cols = [self._linear(i.observable()) for i in identities]

    def _linear(self, o: Observable) -> dict:
        d = connected_decomposition(o, self.constraint)
        poly = sympy.Poly(d.poly, *d.symbols) if d.symbols else None
        vec = {}
        if poly is None:
            if d.poly != 0:
                vec["__one__"] = _frac(d.poly)
            return vec
        for monom, c in poly.terms():
            deg = sum(monom)
            if deg == 0:
                vec["__one__"] = _frac(c)
            elif deg == 1:
                vec[d.keys[monom.index(1)]] = _frac(c)
            else:
                raise ClosureError(f"observable {o.name!r} is not linear in connected observables")
        return vec

    def express(self, key) -> list[Fraction] | None:
        cols = self.columns + self.identity_cols
        rows = sorted({k for c in cols for k in c} | {key}, key=repr)
        a = sympy.Matrix(len(rows), len(cols), lambda i, j: _rat(cols[j].get(rows[i], 0)))
        b = sympy.Matrix(len(rows), 1, lambda i, _: 1 if rows[i] == key else 0)
        try:
            sol, params = a.gauss_jordan_solve(b)
        except ValueError:
            return None
        if params.shape[0]:
            sol = sol.subs({p: 0 for p in params})
        return [_frac(x) for x in sol[: len(self.columns)]]

    def rewrite(self, d: Decomposition, symbols):
        """Substitute declared observables for connected basis elements.

        Returns ``(expr, missing)`` with ``missing`` the unexpressible basis
        observables.
        """
        subs, missing = {}, []
        for sym, key, b in zip(d.symbols, d.keys, d.basis):
            coords = self.express(key)
            if coords is None:
                missing.append(b)
                continue
            subs[sym] = sum((_rat(c) * s for c, s in zip(coords, symbols)), sympy.Integer(0))
        if missing:
            return None, missing
        return sympy.expand(d.poly.xreplace(subs)), []


@dataclass
class ClosureReport:
    closed: bool
    names: list[str]
    analysis: AdjointAnalysis
    polynomials: list[tuple[JumpAnalysis, EigenComponent, sympy.Expr]] = field(default_factory=list)
    offenders: list[tuple[str, Observable]] = field(default_factory=list)
    frozen: dict = field(default_factory=dict)
    messages: list[str] = field(default_factory=list)

    def text(self) -> str:
        lines = ["closed" if self.closed else "not closed"]
        lines.extend(self.messages)
        for label, o in self.offenders:
            pats = ", ".join(t.pattern.text() for t in o.combo)
            lines.append(f"offending observable ({label}): {pats}")
        return "\n".join(lines)


def check_polynomial_jump_closure(H: Hamiltonian, obs: Sequence[Observable], constraint: ConstraintSet | None = None,
                                  identities: Sequence[Identity] = (), frozen: dict | None = None,
                                  depth_limit: int = 3) -> ClosureReport:
    """Eigen-case polynomial jump-closure certificate.

    ``frozen`` maps extra conserved observables to their values; they take
    part in the analysis (and must have zero eigenvalue) and are replaced by
    constants in the polynomials.
    """
    constraint = constraint if constraint is not None else H.constraint
    frozen = dict(frozen or {})
    frozen_obs = [o for o, _ in frozen.values()]
    all_obs = list(obs) + frozen_obs
    analysis = analyze_adjoint(H, all_obs, constraint, depth_limit)
    names = [o.name or f"O{i}" for i, o in enumerate(obs)]
    report = ClosureReport(True, names, analysis, frozen=frozen)
    for j in analysis.jumps:
        if not j.eigen:
            report.closed = False
            report.messages.append(f"{j.name}: {j.reason}")
            if j.offending is not None:
                for _, r in j.offending:
                    report.offenders.append((f"{j.name} input", Observable.single(r.input, r.i_embed.vmap, r.i_embed.emap)))
                    report.offenders.append((f"{j.name} output", Observable.single(r.output, r.o_embed.vmap, r.o_embed.emap)))
    for j in analysis.jumps:
        for comp in j.components:
            if any(comp.form[len(obs) + i] for i in range(len(frozen_obs))):
                report.closed = False
                report.messages.append(f"{j.name}: frozen observable is not conserved")
    if not report.closed:
        return report
    basis = _Basis(all_obs, constraint, identities)
    symbols = [sympy.Symbol(n) for n in names] + [sympy.Symbol(f"__frozen{i}") for i in range(len(frozen_obs))]
    values = {symbols[len(obs) + i]: _rat(v) for i, (_, v) in enumerate(frozen.values())}
    for j in analysis.jumps:
        for comp in j.components:
            if comp.form.is_zero():
                continue
            d = connected_decomposition(jump_closure(comp.element), constraint)
            expr, missing = basis.rewrite(d, symbols)
            if missing:
                report.closed = False
                report.messages.append(f"{j.name}: jump closure needs observables outside the declared set")
                for b in missing:
                    report.offenders.append((f"{j.name} closure", b))
                continue
            report.polynomials.append((j, comp, sympy.expand(expr.xreplace(values))))
    return report


# --------------------------------------------------------------------------
# differential operator

GREEK = {
    "alpha": "α", "beta": "β", "gamma": "γ", "delta": "δ", "epsilon": "ε", "eta": "η",
    "kappa": "κ", "lambda": "λ", "mu": "μ", "nu": "ν", "rho": "ρ", "sigma": "σ", "tau": "τ",
}


def _pretty_name(name: str) -> str:
    for word, letter in GREEK.items():
        if name == word:
            return letter
        if name.startswith(word) and (name[len(word):].isdigit() or name[len(word)] == "_"):
            return letter + name[len(word):]
    return name


@dataclass(frozen=True)
class DTerm:
    coeff: sympy.Expr
    mu: tuple[Fraction, ...]
    k: tuple[int, ...]


@dataclass
class DifferentialOperator:
    """``D = Σ c · e^{μ·λ} ∂^k`` over the declared observables."""

    names: list[str]
    terms: list[DTerm]
    factors: list[tuple[sympy.Expr, LinearForm, dict]]  # (κα, ℓ, {k: coeff})

    def term_dict(self) -> dict:
        return {(t.mu, t.k): t.coeff for t in self.terms}

    def coefficient_values(self, params: dict) -> list[tuple[float, tuple, tuple]]:
        subs = {sympy.Symbol(k, positive=True): v for k, v in params.items()}
        out = []
        for t in self.terms:
            val = sympy.sympify(t.coeff).subs(subs)
            if not val.is_number:
                raise ValueError(f"unresolved parameters in {t.coeff}")
            out.append((float(val), t.mu, t.k))
        return out

    def _lambda(self, i, latex=False) -> str:
        if len(self.names) == 1:
            return "\\lambda" if latex else "λ"
        n = self.names[i]
        return f"\\lambda_{{{n}}}" if latex else f"λ_{n}"

    def text(self) -> str:
        if not self.factors:
            return "0"
        pieces = []
        for coeff, form, poly in self.factors:
            lam = [self._lambda(i) for i in range(len(self.names))]
            exp = _linear_text(form.coefficients, lam)
            e = f"e^{exp}" if len(lam) == 1 and exp == lam[0] else f"e^{{{exp}}}"
            for k, c in poly.items():
                cc = sympy.expand(coeff * c)
                ctext = _coeff_text(cc)
                deriv = "".join(
                    ("∂" + lam[i]) + (f"^{n}" if n > 1 else "") for i, n in enumerate(k) if n
                )
                pieces.append((ctext, f"({e}−1)", deriv))
        out = ""
        for idx, (c, e, d) in enumerate(pieces):
            neg = c.startswith("-")
            c = c[1:] if neg else c
            sep = ("−" if neg else "") if idx == 0 else (" − " if neg else " + ")
            if c == "1":
                c = ""
            out += sep + c + e + d
        return out

    def latex(self) -> str:
        if not self.factors:
            return "0"
        out = []
        for coeff, form, poly in self.factors:
            lam = [self._lambda(i, latex=True) for i in range(len(self.names))]
            exp = _linear_text(form.coefficients, lam).replace("−", "-")
            for k, c in poly.items():
                cc = sympy.expand(coeff * c)
                deriv = "".join(
                    f"\\partial_{{{lam[i]}}}" + (f"^{{{n}}}" if n > 1 else "") for i, n in enumerate(k) if n
                )
                out.append(f"{sympy.latex(cc)}\\left(e^{{{exp}}}-1\\right){deriv}")
        return " + ".join(out)

    def to_json(self) -> dict:
        return {
            "observables": list(self.names),
            "terms": [
                {"coeff": str(t.coeff), "mu": [str(m) for m in t.mu], "k": list(t.k)}
                for t in self.terms
            ],
        }


def _coeff_text(c: sympy.Expr) -> str:
    syms = sorted(c.free_symbols, key=lambda s: s.name)
    rename = {s: sympy.Symbol(_pretty_name(s.name)) for s in syms}
    txt = str(c.xreplace(rename)).replace("**", "^").replace("*", "·")
    if "+" in txt[1:] or "-" in txt[1:]:
        txt = f"({txt})"
    return txt


def derive_differential_operator(H: Hamiltonian, obs: Sequence[Observable], constraint: ConstraintSet | None = None,
                                 identities: Sequence[Identity] = (), frozen: dict | None = None,
                                 report: ClosureReport | None = None) -> DifferentialOperator:
    if report is None:
        report = check_polynomial_jump_closure(H, obs, constraint, identities, frozen)
    if not report.closed:
        raise ClosureError(report.text())
    names = report.names
    symbols = [sympy.Symbol(n) for n in names]
    factors = []
    acc: dict = {}
    for j, comp, expr in report.polynomials:
        form = LinearForm(comp.form.coefficients[: len(names)])
        poly = sympy.Poly(expr, *symbols) if symbols else None
        pdict = {}
        for monom, c in (poly.terms() if poly is not None else [((), expr)]):
            pdict[tuple(monom)] = c
        factors.append((j.rate, form, pdict))
        for k, c in pdict.items():
            zero = tuple(Fraction(0) for _ in names)
            for mu, sign in ((form.coefficients, 1), (zero, -1)):
                key = (mu, k)
                acc[key] = sympy.expand(acc.get(key, 0) + sign * j.rate * c)
    terms = [DTerm(c, mu, k) for (mu, k), c in acc.items() if c != 0]
    return DifferentialOperator(names, terms, factors)


# --------------------------------------------------------------------------
# moment equations

@dataclass
class MomentOdeSystem:
    """``d⟨O^n⟩/dt = Σ c · ⟨O^m⟩`` for every multi-index ``n`` with ``|n| <= order``."""

    names: list[str]
    variables: list[tuple[int, ...]]
    rhs: dict  # n -> {m: coeff}
    closed: bool

    def matrices(self, params: dict | None = None):
        """Numeric ``(A, b)`` with ``dm/dt = A m + b``."""
        subs = {sympy.Symbol(k, positive=True): v for k, v in (params or {}).items()}
        index = {n: i for i, n in enumerate(self.variables)}
        a = np.zeros((len(self.variables), len(self.variables)))
        b = np.zeros(len(self.variables))
        for n, terms in self.rhs.items():
            for m, c in terms.items():
                val = sympy.sympify(c).subs(subs)
                if not val.is_number:
                    raise ValueError(f"unresolved parameters in {c}")
                if sum(m) == 0:
                    b[index[n]] += float(val)
                else:
                    a[index[n], index[m]] += float(val)
        return a, b

    def text(self) -> str:
        lines = []
        for n in self.variables:
            lhs = _moment_name(n, self.names)
            rhs = " + ".join(
                f"({c})·{_moment_name(m, self.names)}" if sum(m) else f"({c})"
                for m, c in self.rhs[n].items()
            ) or "0"
            lines.append(f"d{lhs}/dt = {rhs}")
        return "\n".join(lines)


def _moment_name(n, names) -> str:
    inner = "·".join(f"{names[i]}^{e}" if e > 1 else names[i] for i, e in enumerate(n) if e)
    return f"⟨{inner}⟩"


def multi_indices(dim: int, order: int) -> list[tuple[int, ...]]:
    out = []
    for total in range(1, order + 1):
        for combo in itertools.combinations_with_replacement(range(dim), total):
            n = [0] * dim
            for i in combo:
                n[i] += 1
            out.append(tuple(n))
    return sorted(set(out), key=lambda n: (sum(n), tuple(-x for x in n)))


def moment_odes(D: DifferentialOperator, order: int) -> MomentOdeSystem:
    dim = len(D.names)
    variables = multi_indices(dim, order)
    rhs = {}
    closed = True
    for n in variables:
        acc: dict = {}
        for t in D.terms:
            for j in itertools.product(*(range(x + 1) for x in n)):
                w = sympy.Integer(1)
                for ni, ji, mi in zip(n, j, t.mu):
                    w *= math.comb(ni, ji) * _rat(mi) ** (ni - ji)
                if w == 0:
                    continue
                m = tuple(a + b for a, b in zip(j, t.k))
                acc[m] = sympy.expand(acc.get(m, 0) + t.coeff * w)
        acc = {m: c for m, c in acc.items() if c != 0}
        if any(sum(m) > order for m in acc):
            closed = False
        rhs[n] = acc
    return MomentOdeSystem(list(D.names), variables, rhs, closed)


def pure_initial_moments(sys: MomentOdeSystem, values: Sequence[float]) -> np.ndarray:
    return np.array([math.prod(float(v) ** e for v, e in zip(values, n)) for n in sys.variables])


def integrate_odes(sys: MomentOdeSystem, init, t_grid: Sequence[float], params: dict | None = None,
                   step: float = 1e-3) -> np.ndarray:
    """Fixed-step RK4; returns an array of shape ``(len(t_grid), len(variables))``."""
    if not sys.closed:
        raise ClosureError("moment system is not closed at this order")
    a, b = sys.matrices(params)
    y = np.asarray(init, dtype=float).copy()

    def f(v):
        return a @ v + b

    out = []
    t = 0.0
    for target in t_grid:
        span = target - t
        if span < 0:
            raise ValueError("time grid must be non-decreasing and start at or after 0")
        n = max(1, math.ceil(span / step - 1e-12)) if span > 0 else 0
        h = span / n if n else 0.0
        for _ in range(n):
            k1 = f(y)
            k2 = f(y + 0.5 * h * k1)
            k3 = f(y + 0.5 * h * k2)
            k4 = f(y + h * k3)
            y = y + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        t = target
        out.append(y.copy())
    return np.array(out)


# --------------------------------------------------------------------------
# closed-form oracles

ORACLES = ("birth-death-pgf", "birth-death-emgf", "voter-edge-emgf")


@dataclass
class ClosedFormOracle:
    name: str
    parameters: dict

    def __post_init__(self):
        if self.name not in ORACLES:
            raise ValueError(f"unknown oracle {self.name!r}; choose from {', '.join(ORACLES)}")


def eval_oracle(o: ClosedFormOracle, t: float, lam) -> float:
    p = o.parameters
    if o.name.startswith("birth-death"):
        beta, tau, n0 = float(p["beta"]), float(p["tau"]), int(p.get("N", 0))
        if tau <= 0:
            raise ValueError("tau must be positive")
        decay = math.exp(-tau * t)
        if o.name == "birth-death-emgf":
            z = math.exp(float(lam))
            return math.exp(beta / tau * (1 - decay) * (z - 1)) * (1 + decay * (z - 1)) ** n0
        # probability generating function at x = lam
        x = float(lam)
        return math.exp(beta / tau * (1 - decay) * (x - 1)) * (1 + decay * (x - 1)) ** n0
    k0, k1 = float(p["kappa0"]), float(p["kappa1"])
    nw, nb = float(p["Nw"]), float(p["Nb"])
    nww, nwb, nbb = (float(p[k]) for k in ("Nww", "Nwb", "Nbb"))
    big_k = k0 * (nw - 1) + k1 * (nb - 1)
    if big_k <= 0:
        raise ValueError("K must be positive")
    kb0, kb1 = k0 * (nw - 1) / big_k, k1 * (nb - 1) / big_k
    lww, lwb, lbb = (float(x) for x in lam)
    decay = math.exp(-big_k * t)
    inner = decay * math.exp(lwb) + (1 - decay) * (kb0 * math.exp(lww) + kb1 * math.exp(lbb))
    return math.exp(lww * nww + lbb * nbb) * inner ** nwb


def voter_unit_probabilities(kappa0, kappa1, nw, nb, t):
    """Per-edge probabilities ``(p_W, p_D, p_B)`` at time ``t`` for an initially mixed edge."""
    big_k = kappa0 * (nw - 1) + kappa1 * (nb - 1)
    d = math.exp(-big_k * t)
    return ((1 - d) * kappa0 * (nw - 1) / big_k, d, (1 - d) * kappa1 * (nb - 1) / big_k)
