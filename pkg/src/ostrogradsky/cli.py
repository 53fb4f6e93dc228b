"""Command-line front end.

Exit codes: 0 success, 1 verification failure, 2 usage error, 3 divergence,
4 I/O failure.
"""

import argparse
import dataclasses
import json
import sys
from pathlib import Path

import numpy as np

from . import gravwave as gw
from . import oscillator as osc
from .config import build_run_config, load_config, parse_param
from .constraints import build_constraint_chain, primary_constraints
from .dynamics import hamiltonian
from .errors import OstrogradskyError, StructureError
from .integrate import drift_report, integrate, integrate_many, write_csv, write_json
from .kinematics import CanonicalState, Jet, canonical_from_jet
from .system import CanonicalSystem
from .verify import verify_mode, verify_oscillator

EXIT_OK, EXIT_VERIFY, EXIT_USAGE, EXIT_DIVERGED, EXIT_IO = 0, 1, 2, 3, 4

MODELS = {
    "oscillator": {
        "params": {"m": 1.0, "h1": 1.0, "h2": 1.0, "h3": 1.0, "lambda": 1.0},
        "description": "3D harmonic oscillator lifted to two fourth-order variables",
    },
    "gravwave-mode": {
        "params": {"c": 1.0, "k": 1.0},
        "description": "single transverse mode of the fourth-order wave equation",
    },
}


class UsageError(Exception):
    pass


def _fmt(v):
    # the addition turns -0.0 into 0.0
    return float(format(float(v), ".17g")) + 0.0


def _vec(values):
    return [_fmt(v) for v in np.atleast_1d(values)]


def resolve_params(model, params):
    if model not in MODELS:
        raise UsageError(f"unknown model {model!r}; see list-models")
    merged = dict(MODELS[model]["params"])
    for key, value in params.items():
        if key == "h" and model == "oscillator":
            merged.update(h1=value, h2=value, h3=value)
        elif key in merged:
            merged[key] = value
        else:
            raise UsageError(f"model {model!r} has no parameter {key!r}")
    return merged


def oscillator_params(p):
    return osc.OscillatorParams(p["m"], p["h1"], p["h2"], p["h3"], p["lambda"])


def faulty(spec, fault):
    """Copy of ``spec`` with a deliberately corrupted callback (test hook)."""
    if fault is None:
        return spec
    if fault != "dV":
        raise UsageError(f"unknown fault {fault!r}")
    lg = spec.lagrangian
    bad = dataclasses.replace(lg, dV=lambda q, f=lg.dV: 2.0 * np.asarray(f(q)))
    return dataclasses.replace(spec, lagrangian=bad)


def _parse_vector(text, size, name):
    try:
        vals = np.array([float(v) for v in text.replace(",", " ").split()])
    except ValueError:
        raise UsageError(f"--{name}: not a list of numbers") from None
    if vals.size != size:
        raise UsageError(f"--{name}: expected {size} values, got {vals.size}")
    return vals


# ---------------------------------------------------------------- derive


def derive_report(model, params, state=None, jet=None, max_level=None):
    """Momenta, energy, constraints and chain summary at one point."""
    if model == "oscillator":
        op = oscillator_params(params)
        spec = osc.make_oscillator(op)
        if jet is not None:
            x = canonical_from_jet(spec, Jet.from_array(jet)).as_array()
        else:
            x = np.zeros(8) if state is None else np.asarray(state, dtype=float)
        chain = build_constraint_chain(spec, max_level=max_level)
        cs = CanonicalState.from_array(x)
        return {
            "model": model,
            "params": params,
            "state": {"Q1": _vec(cs.Q1), "Q2": _vec(cs.Q2), "P1": _vec(cs.P1), "P2": _vec(cs.P2)},
            "P1": _vec(cs.P1),
            "P2": _vec(cs.P2),
            "H": _fmt(hamiltonian(spec, x)),
            "constraints": _vec(primary_constraints(spec, x)),
            "chain": _chain_json(chain, x),
        }
    mp = gw.ModeParams(params["c"], params["k"])
    system = gw.make_mode_model(mp)
    x = np.zeros(4) if state is None else np.asarray(state if jet is None else jet, dtype=float)
    w2 = mp.omega**2
    psi = lambda z: gw.mode_constraint(mp, z[2], z[3], z[1], z[0])
    chain = build_constraint_chain(system, max_level=max_level, base=[psi])
    return {
        "model": model,
        "params": params,
        "state": dict(zip(system.column_names(), _vec(x))),
        "P1": _vec(-(x[3] + w2 * x[1])),
        "P2": _vec(x[2] + w2 * x[0]),
        "H": _fmt(system.energy(x)),
        "constraints": _vec(system.default_constraints().values(x)),
        "chain": _chain_json(chain, x),
    }


def _chain_json(chain, x):
    return {
        "level": chain.closure.level,
        "closed": bool(chain.closure.closed),
        "coefficients": [_vec(row) for row in np.atleast_2d(chain.closure.coefficients)],
        "names": list(chain.names),
        "values": _vec(chain.values(x)) if len(chain.names) else [],
    }


def cmd_derive(args, cfg):
    K = 2 if cfg.model == "oscillator" else 1
    state = _parse_vector(args.state, 4 * K, "state") if args.state else None
    jet = _parse_vector(args.jet, 4 * K, "jet") if args.jet else None
    report = derive_report(cfg.model, cfg.params, state, jet)
    text = json.dumps(report, indent=2) + "\n"
    if cfg.output:
        Path(cfg.output).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


# ---------------------------------------------------------------- integrate


def build_system(model, params, fault=None):
    """``(system, constraints)`` for a registered model."""
    if model == "oscillator":
        op = oscillator_params(params)
        spec = faulty(osc.make_oscillator(op), fault)
        system = CanonicalSystem(spec)
        if op.is_isotropic:
            cons = osc.isotropic_constraint_set(op)
        else:
            cons = build_constraint_chain(system).as_constraint_set()
        return system, cons
    system = gw.make_mode_model(gw.ModeParams(params["c"], params["k"]))
    return system, system.default_constraints()


def initial_state(cfg, system, args):
    if args.initial:
        return _parse_vector(args.initial, system.dim, "initial")
    if args.cbar:
        if cfg.model != "oscillator":
            raise UsageError("--cbar only applies to the oscillator")
        op = oscillator_params(cfg.params)
        if not op.is_isotropic:
            raise UsageError("--cbar requires equal spring constants")
        cbar = _parse_vector(args.cbar, 8, "cbar")
        return osc.state_from_cbar(system.spec, op, cbar).as_array()
    return np.random.default_rng(cfg.seed).uniform(-1.0, 1.0, system.dim)


def _write(traj, path, fmt):
    if fmt == "json":
        write_json(traj, path)
    else:
        write_csv(traj, path)


def _summary(traj):
    rep = drift_report(traj)
    return (
        f"steps={len(traj) - 1} t_end={traj.times[-1]:.17g} "
        f"max_H_drift={rep['max_H_drift']:.17g} "
        f"max_constraint_norm={rep['max_constraint_norm']:.17g} "
        f"diverged={str(rep['diverged']).lower()}"
    )


def _batch_states(path, dim):
    rows = []
    for line in Path(path).read_text().splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            rows.append(_parse_vector(line, dim, "batch"))
    if not rows:
        raise UsageError("--batch: no initial states found")
    return rows


def cmd_integrate(args, cfg):
    system, cons = build_system(cfg.model, cfg.params)
    kw = dict(mode=cfg.mode, constraints=cons, every=cfg.projection_every)
    if args.batch:
        initials = _batch_states(args.batch, system.dim)
        trajs = integrate_many(system, initials, cfg.dt, cfg.steps, **kw)
        out = Path(cfg.output or f"trajectory.{cfg.format}")
        for i, traj in enumerate(trajs):
            path = out.with_name(f"{out.stem}_{i}{out.suffix or '.' + cfg.format}")
            _write(traj, path, cfg.format)
            print(f"[{i}] {path} {_summary(traj)}")
        return EXIT_DIVERGED if any(t.diverged for t in trajs) else EXIT_OK

    traj = integrate(system, initial_state(cfg, system, args), cfg.dt, cfg.steps, **kw)
    if cfg.output:
        _write(traj, cfg.output, cfg.format)
        print(_summary(traj))
    else:
        _write(traj, sys.stdout, cfg.format)
        print(_summary(traj), file=sys.stderr)
    return EXIT_DIVERGED if traj.diverged else EXIT_OK


# ---------------------------------------------------------------- verify


def cmd_verify(args, cfg):
    if cfg.model == "oscillator":
        op = oscillator_params(cfg.params)
        spec = faulty(osc.make_oscillator(op), args.fault)
        checks = verify_oscillator(op, seed=cfg.seed, spec=spec)
    else:
        if args.fault:
            raise UsageError("--fault only applies to the oscillator")
        checks = verify_mode(gw.ModeParams(cfg.params["c"], cfg.params["k"]), seed=cfg.seed)
    for c in checks:
        print(c.line())
    ok = all(c.passed for c in checks)
    print(f"{sum(c.passed for c in checks)}/{len(checks)} checks passed")
    return EXIT_OK if ok else EXIT_VERIFY


def cmd_list_models(args, cfg):
    for name, entry in MODELS.items():
        params = " ".join(f"{k}={v:g}" for k, v in entry["params"].items())
        print(f"{name}: {entry['description']} [{params}]")
    return EXIT_OK


# ---------------------------------------------------------------- parser


def _common(p):
    p.add_argument("--model")
    p.add_argument("--param", action="append", default=[], metavar="KEY=VALUE")
    p.add_argument("--dt", type=float)
    p.add_argument("--steps", type=int)
    p.add_argument("--mode", choices=("free", "projected"))
    p.add_argument("--projection-every", type=int, dest="projection_every")
    p.add_argument("--output")
    p.add_argument("--format", choices=("csv", "json"))
    p.add_argument("--seed", type=int)
    p.add_argument("--config")


def make_parser():
    parser = argparse.ArgumentParser(
        prog="ostrogradsky",
        description="Higher-derivative models in canonical form: derivation, integration, checks.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("derive", help="momenta, energy and constraints at one point")
    _common(p)
    p.add_argument("--state", help="flat canonical state Q1,Q2,P1,P2")
    p.add_argument("--jet", help="flat jet qbar,qbar',qbar'',qbar'''")
    p.set_defaults(func=cmd_derive)

    p = sub.add_parser("integrate", help="RK4 run written as CSV or JSON")
    _common(p)
    p.add_argument("--initial", help="flat initial state")
    p.add_argument("--cbar", help="eight coefficients of the analytic oscillator solution")
    p.add_argument("--batch", help="file with one initial state per line")
    p.set_defaults(func=cmd_integrate)

    p = sub.add_parser("verify", help="numerical self-checks for a model")
    _common(p)
    p.add_argument("--fault", choices=("dV",), help="corrupt a callback (tests the checks)")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("list-models", help="registered models and their parameters")
    p.set_defaults(func=cmd_list_models, model=None, param=[], config=None)
    return parser


def _run_config(args):
    file_values = load_config(args.config) if getattr(args, "config", None) else {}
    overrides = {
        key: getattr(args, key, None)
        for key in ("model", "dt", "steps", "mode", "projection_every", "output", "format", "seed")
    }
    flag_params = dict(parse_param(item) for item in getattr(args, "param", []))
    cfg = build_run_config(file_values, overrides, flag_params)
    cfg.params = resolve_params(cfg.model, cfg.params)
    return cfg


def main(argv=None):
    parser = make_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    try:
        if args.command == "list-models":
            return args.func(args, None)
        cfg = _run_config(args)
        return args.func(args, cfg)
    except (UsageError, StructureError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except OstrogradskyError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VERIFY


def entry():
    sys.exit(main())


if __name__ == "__main__":
    entry()
