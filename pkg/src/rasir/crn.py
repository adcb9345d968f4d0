"""Discrete moment bisimulation, reaction networks and Gillespie simulation.

Random streams: trajectory ``i`` of a batch seeded with ``seed`` draws from
``numpy.random.PCG64(SeedSequence(seed, spawn_key=(i,)))``.  The substream
depends only on ``(seed, i)``, so serial and parallel runs agree bit for bit.
"""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np
import sympy

from .moments import ClosureReport, Identity, check_polynomial_jump_closure, _frac, _rat
from .state import Hamiltonian, Observable


@dataclass(frozen=True)
class Reaction:
    inputs: tuple[int, ...]
    outputs: tuple[int, ...]
    rate: float
    label: str = ""
    rate_expr: str = ""


@dataclass
class Crn:
    species: list[str]
    reactions: list[Reaction] = field(default_factory=list)

    def __post_init__(self):
        n = len(self.species)
        for r in self.reactions:
            if len(r.inputs) != n or len(r.outputs) != n:
                raise ValueError("stoichiometry vectors must match the species list")
            if any(x < 0 for x in r.inputs + r.outputs):
                raise ValueError("stoichiometries must be nonnegative")
            if not r.rate > 0:
                raise ValueError(f"rate constants must be positive, got {r.rate}")

    def stoichiometry(self) -> np.ndarray:
        return np.array([[o - i for i, o in zip(r.inputs, r.outputs)] for r in self.reactions], dtype=np.int64).reshape(len(self.reactions), len(self.species))


def falling_factorial(n: int, k: int) -> int:
    out = 1
    for i in range(k):
        out *= n - i
    return out


def propensity(c: Crn, j: int, counts: Sequence[int]) -> float:
    r = c.reactions[j]
    a = r.rate
    for n, k in zip(counts, r.inputs):
        if n < k:
            return 0.0
        a *= falling_factorial(int(n), k)
    return a


# --------------------------------------------------------------------------
# bisimulation check

@dataclass
class DmbResult:
    crn: Crn | None
    diagnostics: list[str]
    report: ClosureReport | None = None
    warnings: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.crn is not None


def _stirling2(n: int, m: int) -> int:
    if n == m:
        return 1
    if m == 0 or m > n:
        return 0
    return m * _stirling2(n - 1, m) + _stirling2(n - 1, m - 1)


def falling_factorial_coefficients(expr: sympy.Expr, symbols: Sequence[sympy.Symbol]) -> dict[tuple[int, ...], Fraction]:
    """Expand a polynomial in the basis ``Π (x_i)_{k_i}``."""
    poly = sympy.Poly(expr, *symbols)
    out: dict[tuple[int, ...], Fraction] = {}
    for monom, c in poly.terms():
        parts = [[(m, _stirling2(n, m)) for m in range(n + 1) if _stirling2(n, m)] for n in monom]
        for choice in _product(parts):
            k = tuple(m for m, _ in choice)
            w = _frac(c)
            for _, s in choice:
                w *= s
            out[k] = out.get(k, Fraction(0)) + w
    return {k: v for k, v in out.items() if v}


def _product(parts):
    if not parts:
        yield ()
        return
    for head in parts[0]:
        for tail in _product(parts[1:]):
            yield (head,) + tail


def check_dmb(H: Hamiltonian, obs: Sequence[Observable], constraint=None, identities: Sequence[Identity] = (),
              frozen: dict | None = None, params: dict | None = None) -> DmbResult:
    """Synthesize the bisimilar reaction network, or explain why none exists.

    Each eigen component of a jump term whose closure polynomial expands as
    ``Σ_k α_k Π (O_i)_{k_i}`` with ``α_k > 0`` yields one reaction per ``k``
    with input ``k``, output ``k + η`` and rate ``α_k κ``.  Components with
    ``η = 0`` leave every count unchanged and are skipped.
    """
    report = check_polynomial_jump_closure(H, obs, constraint, identities, frozen)
    names = report.names
    if not report.closed:
        return DmbResult(None, ["observables are not polynomially jump-closed"] + report.text().splitlines()[1:], report)
    symbols = [sympy.Symbol(n) for n in names]
    subs = {sympy.Symbol(k, positive=True): v for k, v in (params or {}).items()}
    diags, warns, reactions = [], [], []
    for j, comp, expr in report.polynomials:
        eta = comp.form.coefficients[: len(names)]
        if not all(e.denominator == 1 for e in eta):
            diags.append(f"{j.name}: eigenvalues {[str(e) for e in eta]} are not integers")
            nz = [e for e in eta if e]
            if nz:
                warns.append(f"{j.name}: rescaling the formal variables by a common factor could make the eigenvalues integral")
            continue
        coeffs = falling_factorial_coefficients(expr, symbols)
        for k, alpha in sorted(coeffs.items()):
            if alpha < 0:
                diags.append(f"{j.name}: negative falling-factorial coefficient {alpha} at {k}")
                continue
            out = tuple(a + int(e) for a, e in zip(k, eta))
            if any(x < 0 for x in out):
                diags.append(f"{j.name}: output stoichiometry {out} would be negative")
                continue
            rate_expr = sympy.simplify(j.rate * _rat(alpha))
            val = rate_expr.subs(subs)
            rate = float(val) if val.is_number else 1.0
            if not val.is_number:
                warns.append(f"{j.name}: rate {rate_expr} left unresolved; placeholder 1.0 used")
            reactions.append(Reaction(tuple(k), out, rate, j.name, str(rate_expr)))
    if diags:
        return DmbResult(None, diags, report, warns)
    return DmbResult(Crn(list(names), reactions), [], report, warns)


# --------------------------------------------------------------------------
# export

def _side_text(vec, species) -> str:
    parts = [(f"{n} " if n > 1 else "") + s for n, s in zip(vec, species) if n]
    return " + ".join(parts) if parts else "∅"


def crn_to_text(c: Crn) -> str:
    lines = []
    for r in c.reactions:
        lines.append(f"{_side_text(r.inputs, c.species)} -> {_side_text(r.outputs, c.species)} @ {r.rate:.12g}")
    return "\n".join(lines)


def crn_to_json(c: Crn) -> dict:
    return {
        "species": list(c.species),
        "reactions": [
            {"inputs": list(r.inputs), "outputs": list(r.outputs), "rate": r.rate, "label": r.label, "rate_expr": r.rate_expr}
            for r in c.reactions
        ],
    }


def crn_from_json(data: dict) -> Crn:
    return Crn(
        list(data["species"]),
        [
            Reaction(tuple(r["inputs"]), tuple(r["outputs"]), float(r["rate"]), r.get("label", ""), r.get("rate_expr", ""))
            for r in data.get("reactions", [])
        ],
    )


def export_crn(c: Crn, fmt: str = "json") -> str:
    if fmt == "json":
        return json.dumps(crn_to_json(c), indent=2)
    if fmt == "text":
        return crn_to_text(c)
    raise ValueError(f"unknown export format {fmt!r}")


# --------------------------------------------------------------------------
# simulation

@dataclass(frozen=True)
class SsaConfig:
    seed: int
    t_max: float
    n_trajectories: int
    record_grid: tuple[float, ...]
    moment_order: int = 2
    workers: int = 1
    max_events: int = 10_000_000

    def __post_init__(self):
        grid = tuple(float(t) for t in self.record_grid)
        if any(b < a for a, b in zip(grid, grid[1:])):
            raise ValueError("record grid must be sorted")
        if grid and (grid[0] < 0 or grid[-1] > self.t_max):
            raise ValueError("record grid must lie in [0, t_max]")
        object.__setattr__(self, "record_grid", grid)


def trajectory_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(index,))))


def _run_one(rates, reactants, changes, init, grid, seed, index, max_events):
    rng = trajectory_rng(seed, index)
    x = list(init)
    out = np.empty((len(grid), len(x)), dtype=np.int64)
    buf = rng.random(512)
    pos = 0
    t = 0.0
    g = 0
    n_grid = len(grid)
    n_r = len(rates)
    events = 0
    props = [0.0] * n_r
    while g < n_grid:
        total = 0.0
        for j in range(n_r):
            a = rates[j]
            for s, k in reactants[j]:
                n = x[s]
                if n < k:
                    a = 0.0
                    break
                for i in range(k):
                    a *= n - i
            props[j] = a
            total += a
        if total <= 0.0:
            while g < n_grid:
                out[g] = x
                g += 1
            break
        if not math.isfinite(total):
            raise OverflowError("total propensity overflowed")
        if pos + 2 > len(buf):
            buf = rng.random(512)
            pos = 0
        u1, u2 = buf[pos], buf[pos + 1]
        pos += 2
        t_next = t - math.log1p(-u1) / total
        while g < n_grid and grid[g] < t_next:
            out[g] = x
            g += 1
        if g == n_grid:
            break
        target = u2 * total
        acc = 0.0
        chosen = n_r - 1
        for j in range(n_r):
            acc += props[j]
            if target < acc:
                chosen = j
                break
        while props[chosen] == 0.0:
            chosen -= 1
        for s, d in changes[chosen]:
            x[s] += d
        t = t_next
        events += 1
        if events > max_events:
            raise RuntimeError("event budget exceeded")
    return out


def _run_chunk(args):
    rates, reactants, changes, init, grid, seed, lo, hi, max_events = args
    return np.stack([_run_one(rates, reactants, changes, init, grid, seed, i, max_events) for i in range(lo, hi)])


@dataclass
class TrajectoryBatch:
    species: list[str]
    times: np.ndarray
    counts: np.ndarray  # (trajectories, grid, species)
    moment_order: int = 2

    def index_of(self, t: float) -> int:
        hits = np.nonzero(np.isclose(self.times, t, rtol=0, atol=1e-12))[0]
        if not len(hits):
            raise ValueError(f"time {t} is not on the record grid")
        return int(hits[0])

    def means(self) -> np.ndarray:
        return self.counts.mean(axis=0)

    def variances(self) -> np.ndarray:
        return self.counts.var(axis=0, ddof=1) if len(self.counts) > 1 else np.zeros(self.counts.shape[1:])

    def covariances(self) -> np.ndarray:
        """Array ``(grid, species, species)`` of sample covariances."""
        out = np.zeros((len(self.times), len(self.species), len(self.species)))
        for g in range(len(self.times)):
            if len(self.counts) > 1:
                out[g] = np.atleast_2d(np.cov(self.counts[:, g, :].T.astype(float)))
        return out

    def raw_moments(self) -> dict[tuple[int, ...], np.ndarray]:
        from .moments import multi_indices

        data = self.counts.astype(float)
        out = {}
        for n in multi_indices(len(self.species), self.moment_order):
            out[n] = np.prod(data ** np.array(n), axis=2).mean(axis=0)
        return out

    def histogram(self, species: int | str, t: float) -> np.ndarray:
        s = self.species.index(species) if isinstance(species, str) else species
        return np.bincount(self.counts[:, self.index_of(t), s])

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["trajectory", "t", *self.species])
        for i, traj in enumerate(self.counts):
            for t, row in zip(self.times, traj):
                w.writerow([i, repr(float(t)), *map(int, row)])
        return buf.getvalue()

    def summary_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        sp = self.species
        pairs = [(a, b) for a in range(len(sp)) for b in range(a + 1, len(sp))]
        w.writerow(["t", *(f"mean_{s}" for s in sp), *(f"var_{s}" for s in sp), *(f"cov_{sp[a]}_{sp[b]}" for a, b in pairs)])
        means, cov = self.means(), self.covariances()
        for g, t in enumerate(self.times):
            w.writerow([repr(float(t)), *map(repr, map(float, means[g])), *(repr(float(cov[g, s, s])) for s in range(len(sp))),
                        *(repr(float(cov[g, a, b])) for a, b in pairs)])
        return buf.getvalue()


def simulate(c: Crn, init: Sequence[int], cfg: SsaConfig) -> TrajectoryBatch:
    """Gillespie direct method, one independent substream per trajectory."""
    if len(init) != len(c.species) or any(int(x) < 0 for x in init):
        raise ValueError("initial counts must be nonnegative and match the species list")
    rates = [r.rate for r in c.reactions]
    reactants = [[(s, k) for s, k in enumerate(r.inputs) if k] for r in c.reactions]
    changes = [[(s, o - i) for s, (i, o) in enumerate(zip(r.inputs, r.outputs)) if o != i] for r in c.reactions]
    init = [int(x) for x in init]
    grid = list(cfg.record_grid)
    n = cfg.n_trajectories
    if cfg.workers <= 1 or n < 2 * cfg.workers:
        counts = _run_chunk((rates, reactants, changes, init, grid, cfg.seed, 0, n, cfg.max_events)) if n else np.empty((0, len(grid), len(init)), dtype=np.int64)
    else:
        bounds = np.linspace(0, n, cfg.workers + 1).astype(int)
        jobs = [(rates, reactants, changes, init, grid, cfg.seed, int(lo), int(hi), cfg.max_events)
                for lo, hi in zip(bounds, bounds[1:]) if hi > lo]
        with ProcessPoolExecutor(cfg.workers) as pool:
            counts = np.concatenate(list(pool.map(_run_chunk, jobs)))
    return TrajectoryBatch(list(c.species), np.array(grid), counts, cfg.moment_order)


def estimate_emgf(batch: TrajectoryBatch, t: float, lam: Sequence[float]) -> tuple[float, float]:
    """Monte Carlo ``⟨e^{λ·n(t)}⟩`` with a jackknife standard error."""
    g = batch.index_of(t)
    lam = np.asarray(lam, dtype=float)
    vals = np.exp(batch.counts[:, g, :].astype(float) @ lam)
    n = len(vals)
    mean = float(vals.mean())
    if n < 2:
        return mean, float("nan")
    loo = (vals.sum() - vals) / (n - 1)
    se = math.sqrt((n - 1) / n * float(((loo - loo.mean()) ** 2).sum()))
    return mean, se
