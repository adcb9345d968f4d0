"""Command-line interface: ``rasir --model MODEL <command> ...``."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .algebra import BudgetExceeded, commutator, product, reduce
from .crn import SsaConfig, check_dmb, crn_from_json, estimate_emgf, export_crn, simulate
from .model import ModelError, ModelFile, load_model
from .moments import (
    ORACLES,
    ClosedFormOracle,
    ClosureError,
    check_polynomial_jump_closure,
    derive_differential_operator,
    eval_oracle,
    integrate_odes,
    moment_odes,
    pure_initial_moments,
)
from .validate import validate_model

EXIT_OK, EXIT_INVALID, EXIT_CHECK, EXIT_BUDGET = 0, 1, 2, 3


class CheckFailed(Exception):
    pass


def _model(args) -> ModelFile:
    if not args.model:
        raise ModelError(["this command needs --model"])
    return load_model(args.model)


def _selection(m: ModelFile, args):
    names = args.observables or None
    obs = m.select(names)
    chosen = [o.name for o in obs]
    frozen = m.frozen_values(chosen) if getattr(args, "freeze_conserved", False) else {}
    return obs, chosen, frozen


def _closure(m, args):
    obs, chosen, frozen = _selection(m, args)
    rep = check_polynomial_jump_closure(m.hamiltonian(), obs, m.constraint, m.identities, frozen, args.depth)
    return obs, chosen, frozen, rep


def cmd_compose(m, args, out):
    res = product(m.element(args.a), m.element(args.b))
    if args.reduce:
        res = reduce(res, m.constraint)
    out.write(res.text() + "\n")


def cmd_commutator(m, args, out):
    res = commutator(m.element(args.a), m.element(args.b))
    if args.reduce:
        res = reduce(res, m.constraint)
    out.write(res.text() + "\n")


def cmd_closure(m, args, out):
    _, chosen, _, rep = _closure(m, args)
    out.write(rep.text() + "\n")
    for j in rep.analysis.jumps:
        for c in j.components:
            out.write(f"eigen {j.name}: {c.form.text(chosen + list(rep.frozen))}\n")
    for j, comp, expr in rep.polynomials:
        out.write(f"closure {j.name}: {expr}\n")
    if not rep.closed:
        raise CheckFailed("observables are not polynomially jump-closed")


def cmd_derive_pde(m, args, out):
    obs, _, frozen, rep = _closure(m, args)
    if not rep.closed:
        out.write(rep.text() + "\n")
        raise CheckFailed("closure not certified; no operator derived")
    d = derive_differential_operator(m.hamiltonian(), obs, m.constraint, m.identities, frozen, rep)
    if args.format == "latex":
        out.write(d.latex() + "\n")
    elif args.format == "json":
        out.write(json.dumps(d.to_json(), indent=2) + "\n")
    else:
        out.write(d.text() + "\n")


def cmd_synthesize_crn(m, args, out):
    obs, _, frozen = _selection(m, args)
    res = check_dmb(m.hamiltonian(), obs, m.constraint, m.identities, frozen, m.parameters)
    for w in res.warnings:
        print(f"warning: {w}", file=sys.stderr)
    if not res.ok:
        out.write("no discrete moment bisimulation\n" + "\n".join(res.diagnostics) + "\n")
        raise CheckFailed("no moment-bisimilar reaction network for these observables")
    text = export_crn(res.crn, args.format)
    if args.out:
        Path(args.out).write_text(text + "\n")
    out.write(text + "\n")


def _parse_init(pairs, species):
    vals = {}
    for p in pairs or ():
        k, _, v = p.partition("=")
        if k not in species:
            raise ModelError([f"--init: unknown species {k!r}"])
        vals[k] = int(v)
    return vals


def cmd_simulate(m, args, out):
    if args.crn:
        crn = crn_from_json(json.loads(Path(args.crn).read_text()))
        init = {}
        if m is not None:
            known = [s for s in crn.species if s in m.observables]
            init = dict(zip(known, (int(v) for v in m.initial_observable_values(known))))
    else:
        m = m or _model(args)
        obs, _, frozen = _selection(m, args)
        res = check_dmb(m.hamiltonian(), obs, m.constraint, m.identities, frozen, m.parameters)
        if not res.ok:
            out.write("\n".join(res.diagnostics) + "\n")
            raise CheckFailed("no moment-bisimilar reaction network for these observables")
        crn = res.crn
        init = dict(zip(crn.species, (int(v) for v in m.initial_observable_values(crn.species))))
    init.update(_parse_init(args.init, crn.species))
    x0 = [init.get(s, 0) for s in crn.species]
    grid = np.linspace(0.0, args.t_max, args.points)
    cfg = SsaConfig(args.seed, args.t_max, args.trajectories, tuple(grid), workers=args.workers)
    batch = simulate(crn, x0, cfg)
    text = batch.summary_csv() if args.summary else batch.to_csv()
    if args.out:
        Path(args.out).write_text(text)
        out.write(f"wrote {args.trajectories} trajectories to {args.out}\n")
    else:
        out.write(text)
    for lam in args.emgf or ():
        vec = [float(x) for x in lam.split(",")]
        mean, se = estimate_emgf(batch, args.t_max, vec)
        out.write(f"EMGF at t={args.t_max} lambda={vec}: {mean:.6g} ± {se:.2g}\n")


def cmd_moments(m, args, out):
    obs, chosen, frozen, rep = _closure(m, args)
    if not rep.closed:
        out.write(rep.text() + "\n")
        raise CheckFailed("closure not certified")
    d = derive_differential_operator(m.hamiltonian(), obs, m.constraint, m.identities, frozen, rep)
    system = moment_odes(d, args.order)
    out.write(system.text() + "\n")
    if not args.integrate:
        return
    if not system.closed:
        raise CheckFailed(f"moment hierarchy is not closed at order {args.order}")
    init = pure_initial_moments(system, [float(v) for v in m.initial_observable_values(chosen)])
    grid = np.linspace(0.0, args.t_max, args.points)
    sol = integrate_odes(system, init, grid, m.parameters, args.step)
    header = ["t"] + ["".join(str(x) for x in n) for n in system.variables]
    out.write(",".join(header) + "\n")
    for t, row in zip(grid, sol):
        out.write(",".join([f"{t:.6g}"] + [f"{v:.10g}" for v in row]) + "\n")


def cmd_oracle(m, args, out):
    params = dict(m.parameters) if m is not None else {}
    if m is not None and (m.initial_graph is not None or m.initial_counts is not None):
        # initial counts: observable O_x (or x) becomes Nx; a lone observable also becomes N
        for k in m.observables:
            v = float(m.initial_observable_values([k])[0])
            params.setdefault("N" + k.removeprefix("O_"), v)
        if len(m.observables) == 1:
            params.setdefault("N", v)
    for p in args.param or ():
        k, _, v = p.partition("=")
        params[k] = float(v)
    lam = [float(x) for x in args.lam.split(",")]
    o = ClosedFormOracle(args.name, params)
    val = eval_oracle(o, args.t, lam if len(lam) > 1 else lam[0])
    out.write(f"{val:.12g}\n")


def cmd_validate(m, args, out):
    rep = validate_model(m, seed=args.seed)
    out.write(rep.text() + "\n")
    if not rep.ok:
        raise ModelError([c.name for c in rep.checks if not c.passed])


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="rasir", description="Stochastic graph rewriting: rule algebra, moments and CRN synthesis.")
    p.add_argument("--model", help="model JSON path or bundled name (birth-death, hw, voter, voter-flip, tmt)")
    sub = p.add_subparsers(dest="command", required=True)

    def with_obs(sp, freeze=True):
        sp.add_argument("--observables", nargs="+", help="observable names or one observable-set name")
        sp.add_argument("--depth", type=int, default=3, help="commutator depth for the adjoint analysis")
        if freeze:
            sp.add_argument("--freeze-conserved", action="store_true",
                            help="replace conserved observables by their initial values")

    for name, fn in (("compose", cmd_compose), ("commutator", cmd_commutator)):
        sp = sub.add_parser(name)
        sp.add_argument("a")
        sp.add_argument("b")
        sp.add_argument("--reduce", action="store_true", help="drop terms that vanish on constrained states")
        sp.set_defaults(func=fn)

    sp = sub.add_parser("closure")
    with_obs(sp)
    sp.set_defaults(func=cmd_closure)

    sp = sub.add_parser("derive-pde")
    with_obs(sp)
    sp.add_argument("--format", choices=("text", "latex", "json"), default="text")
    sp.set_defaults(func=cmd_derive_pde)

    sp = sub.add_parser("synthesize-crn")
    with_obs(sp)
    sp.add_argument("--format", choices=("text", "json"), default="text")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_synthesize_crn)

    sp = sub.add_parser("simulate")
    with_obs(sp)
    sp.add_argument("--crn", help="CRN JSON file; synthesized from the model when omitted")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--t-max", type=float, default=1.0)
    sp.add_argument("--trajectories", type=int, default=1000)
    sp.add_argument("--points", type=int, default=11, help="number of recording times in [0, t-max]")
    sp.add_argument("--workers", type=int, default=1)
    sp.add_argument("--init", nargs="+", metavar="SPECIES=COUNT")
    sp.add_argument("--summary", action="store_true", help="write means and (co)variances instead of raw counts")
    sp.add_argument("--emgf", nargs="+", metavar="L1,L2,...", help="report the EMGF estimate at t-max")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("moments")
    with_obs(sp)
    sp.add_argument("--order", type=int, default=1)
    sp.add_argument("--integrate", action="store_true")
    sp.add_argument("--t-max", type=float, default=1.0)
    sp.add_argument("--points", type=int, default=11)
    sp.add_argument("--step", type=float, default=1e-3)
    sp.set_defaults(func=cmd_moments)

    sp = sub.add_parser("oracle")
    sp.add_argument("name", choices=ORACLES)
    sp.add_argument("--t", type=float, required=True)
    sp.add_argument("--lambda", dest="lam", required=True, help="comma-separated λ values")
    sp.add_argument("--param", nargs="+", metavar="NAME=VALUE")
    sp.set_defaults(func=cmd_oracle)

    sp = sub.add_parser("validate")
    sp.add_argument("--seed", type=int, default=0)
    sp.set_defaults(func=cmd_validate)
    return p


def run(argv=None, out=None) -> int:
    out = out or sys.stdout
    args = build_parser().parse_args(argv)
    try:
        optional = args.command in ("oracle", "simulate")
        m = load_model(args.model) if args.model else (None if optional else _model(args))
        args.func(m, args, out)
    except ModelError as exc:
        for e in exc.errors:
            print(f"error: {e}", file=sys.stderr)
        return EXIT_INVALID
    except (ValueError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (CheckFailed, ClosureError) as exc:
        print(f"check failed: {exc}", file=sys.stderr)
        return EXIT_CHECK
    except BudgetExceeded as exc:
        print(f"budget exceeded: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    return EXIT_OK


def main() -> None:
    sys.exit(run())
