"""Fixed-step RK4 integration with optional constraint projection, and diagnostics."""

import csv
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .constraints import ConstraintChain, project_array
from .errors import DivergenceError, StructureError
from .kinematics import CanonicalState, as_phase_array
from .system import as_system

DIVERGENCE_THRESHOLD = 1e12


def step_rk4(rhs, state, dt, step_index=0):
    """One classical Runge-Kutta step of ``xdot = rhs(x)``."""
    if not dt > 0:
        raise StructureError("dt", f"time step must be positive, got {dt}")
    x = np.asarray(state, dtype=float)
    k1 = rhs(x)
    k2 = rhs(x + 0.5 * dt * k1)
    k3 = rhs(x + 0.5 * dt * k2)
    k4 = rhs(x + dt * k3)
    out = x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    if not np.all(np.isfinite(out)):
        raise DivergenceError(step_index, "non-finite value in RK4 step")
    return out


def rk4_propagator(A, b, dt):
    """``(M, c)`` such that one RK4 step of ``A x + b`` is ``M x + c``.

    RK4 applied to a linear field is the degree-four Taylor polynomial of the
    exact propagator, so the step can be precomputed once.
    """
    n = A.shape[0]
    hA = dt * A
    hA2 = hA @ hA
    hA3 = hA2 @ hA
    M = np.eye(n) + hA + hA2 / 2 + hA3 / 6 + hA3 @ hA / 24
    c = dt * (np.eye(n) + hA / 2 + hA2 / 6 + hA3 / 24) @ b
    return M, c


@dataclass
class Trajectory:
    times: np.ndarray
    states: np.ndarray
    H_values: np.ndarray
    constraint_norms: np.ndarray
    metadata: dict = field(default_factory=dict)
    diverged: bool = False
    columns: tuple = ()

    def __len__(self):
        return len(self.times)

    def canonical_states(self):
        return [CanonicalState.from_array(x) for x in self.states]

    def state_at(self, i):
        return CanonicalState.from_array(self.states[i])


def _resolve_constraints(system, constraints):
    if constraints is None:
        constraints = system.default_constraints()
    if isinstance(constraints, ConstraintChain):
        constraints = constraints.as_constraint_set()
    return constraints


def integrate(
    model,
    initial,
    dt,
    steps,
    mode="free",
    constraints=None,
    every=1,
    record_every=1,
):
    """Integrate Hamilton's equations (or any first-order system) with RK4.

    ``mode`` is ``"free"`` or ``"projected"``. In projected mode the initial
    state is projected first and then every ``every`` steps. ``constraints``
    is used both for projection and for the recorded residual; it defaults
    to the system's own constraint set. States whose max-norm exceeds
    ``DIVERGENCE_THRESHOLD`` end the run with ``diverged=True``.
    """
    system = as_system(model)
    if not dt > 0:
        raise StructureError("dt", f"time step must be positive, got {dt}")
    if int(steps) < 1:
        raise StructureError("steps", f"need at least one step, got {steps}")
    if mode not in ("free", "projected"):
        raise StructureError("mode", f"unknown mode {mode!r}")
    if int(every) < 1 or int(record_every) < 1:
        raise StructureError("every", "projection and recording intervals must be >= 1")
    steps, every, record_every = int(steps), int(every), int(record_every)
    cons = _resolve_constraints(system, constraints)
    projected = mode == "projected"

    x = as_phase_array(initial).astype(float).copy()
    if x.shape != (system.dim,):
        raise StructureError("initial", f"expected length {system.dim}, got {x.shape}")
    if projected:
        x = project_array(cons, x)

    affine = getattr(system, "affine_form", None)
    if affine is not None:
        M, c = rk4_propagator(*affine, dt)

        def advance(z, n):
            out = M @ z + c
            if not np.all(np.isfinite(out)):
                raise DivergenceError(n, "non-finite value in RK4 step")
            return out
    else:

        def advance(z, n):
            return step_rk4(system.rhs, z, dt, n)

    n_rec = steps // record_every + 1
    states = np.empty((n_rec, system.dim))
    states[0] = x
    rec = 1
    diverged = False
    for n in range(1, steps + 1):
        try:
            x = advance(x, n)
        except DivergenceError:
            diverged = True
            break
        if projected and n % every == 0:
            x = project_array(cons, x)
        if np.max(np.abs(x)) > DIVERGENCE_THRESHOLD:
            diverged = True
            if n % record_every == 0:
                states[rec] = x
                rec += 1
            break
        if n % record_every == 0:
            states[rec] = x
            rec += 1
    states = states[:rec]
    times = np.arange(rec) * (dt * record_every)
    if hasattr(system, "energies"):
        H = system.energies(states)
    else:
        H = np.array([system.energy(s) for s in states])
    if hasattr(cons, "batch_values"):
        norms = np.max(np.abs(cons.batch_values(states)), axis=1, initial=0.0)
    else:
        norms = np.array([cons.max_abs(s) for s in states])
    meta = {
        "model": system.name,
        "dt": float(dt),
        "steps": steps,
        "projected": projected,
        "projection_every": every if projected else 0,
        "record_every": record_every,
        "constraints": list(cons.names),
    }
    return Trajectory(times, states, H, norms, meta, diverged, tuple(system.column_names()))


def integrate_many(model, initials, dt, steps, max_workers=None, **kwargs):
    """Run independent trajectories concurrently, one per initial state."""
    system = as_system(model)
    with ThreadPoolExecutor(max_workers=max_workers) as pool:
        futures = [
            pool.submit(integrate, system, x0, dt, steps, **kwargs) for x0 in initials
        ]
        return [f.result() for f in futures]


def integrate_jet(spec, jet0, dt, steps):
    """Integrate the solved fourth-order equation in jet space ``(qbar, ..., qbar_dddot)``."""
    from .dynamics import jet_rhs

    y = np.asarray(jet0.as_array() if hasattr(jet0, "as_array") else jet0, dtype=float)
    out = np.empty((int(steps) + 1, y.size))
    out[0] = y
    for n in range(1, int(steps) + 1):
        y = step_rk4(lambda z: jet_rhs(spec, z), y, dt, n)
        out[n] = y
    return np.arange(int(steps) + 1) * dt, out


def _window_mask(times, window):
    if window is None:
        return np.ones(times.size, dtype=bool)
    t0, t1 = window
    return (times >= t0) & (times <= t1)


def _linregress(t, y):
    A = np.column_stack([t, np.ones_like(t)])
    (slope, icept), *_ = np.linalg.lstsq(A, y, rcond=None)
    pred = A @ (slope, icept)
    ss_res = float(np.sum((y - pred) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return float(slope), float(icept), r2


def growth_rate_fit(traj, window=None, envelope="exponential", reference=None, period=None):
    """Fit the growth of the state norm over ``window = (t0, t1)``.

    ``envelope="exponential"`` fits ``log |x|`` linearly in ``t`` and returns the
    exponent. ``envelope="linear"`` fits the envelope itself: the norm is
    first reduced to its maximum over consecutive blocks of length ``period``
    (oscillation period of the carrier), and the slope of those maxima is
    returned. ``reference(t)`` is subtracted from the state first when given,
    so that growth of a deviation can be measured.

    Returns a dict with ``rate``, ``r2`` and ``intercept``.
    """
    mask = _window_mask(traj.times, window)
    t = traj.times[mask]
    x = traj.states[mask]
    if reference is not None:
        x = x - np.array([reference(ti) for ti in t])
    if t.size < 3:
        raise StructureError("window", "fewer than three samples in window")
    norms = np.linalg.norm(x, axis=1)
    if envelope == "exponential":
        if np.any(norms <= 0):
            raise StructureError("traj", "norm vanishes inside the fit window")
        slope, icept, r2 = _linregress(t, np.log(norms))
    elif envelope == "linear":
        if period is not None:
            width = max(1, int(round(period / (t[1] - t[0]))))
            nblocks = t.size // width
            if nblocks < 3:
                raise StructureError("window", "window shorter than three periods")
            idx = [
                b * width + int(np.argmax(norms[b * width : (b + 1) * width]))
                for b in range(nblocks)
            ]
            t, norms = t[idx], norms[idx]
        slope, icept, r2 = _linregress(t, norms)
    else:
        raise StructureError("envelope", f"unknown envelope model {envelope!r}")
    return {"rate": slope, "r2": r2, "intercept": icept}


def drift_report(traj):
    """Largest energy drift and constraint residual, and the divergence flag."""
    if len(traj) == 0:
        raise StructureError("traj", "empty trajectory")
    H = traj.H_values
    finite = np.isfinite(H)
    drift = float(np.max(np.abs(H[finite] - H[0]))) if finite[0] else float("nan")
    return {
        "max_H_drift": drift,
        "max_constraint_norm": float(np.max(traj.constraint_norms)),
        "min_H": float(np.min(H)),
        "diverged": bool(traj.diverged),
    }


# ---------------------------------------------------------------- export


def _fmt(v):
    return format(float(v), ".17g")


def export_columns(traj):
    return ["t", *traj.columns, "H", "phi_max"]


def write_csv(traj, path_or_file):
    """Write the trajectory as CSV with a fixed column order and 17 digits."""
    own = isinstance(path_or_file, (str, bytes)) or hasattr(path_or_file, "__fspath__")
    fh = open(path_or_file, "w", newline="") if own else path_or_file
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(export_columns(traj))
        for t, x, H, phi in zip(traj.times, traj.states, traj.H_values, traj.constraint_norms):
            w.writerow([_fmt(t), *(_fmt(v) for v in x), _fmt(H), _fmt(phi)])
    finally:
        if own:
            fh.close()


def _json_float(v):
    return float(_fmt(v))


def trajectory_json(traj):
    cols = export_columns(traj)
    records = []
    for t, x, H, phi in zip(traj.times, traj.states, traj.H_values, traj.constraint_norms):
        vals = [t, *x, H, phi]
        records.append({c: _json_float(v) for c, v in zip(cols, vals)})
    meta = dict(traj.metadata)
    meta["diverged"] = bool(traj.diverged)
    meta["columns"] = cols
    return {"metadata": meta, "records": records}


def write_json(traj, path_or_file):
    own = isinstance(path_or_file, (str, bytes)) or hasattr(path_or_file, "__fspath__")
    fh = open(path_or_file, "w") if own else path_or_file
    try:
        json.dump(trajectory_json(traj), fh, indent=1)
        fh.write("\n")
    finally:
        if own:
            fh.close()


def read_csv(path):
    """Load a trajectory CSV back into ``(columns, array)``."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], np.array([[float(v) for v in r] for r in rows[1:]])


__all__ = [
    "DIVERGENCE_THRESHOLD",
    "Trajectory",
    "drift_report",
    "growth_rate_fit",
    "integrate",
    "integrate_jet",
    "integrate_many",
    "read_csv",
    "rk4_propagator",
    "step_rk4",
    "trajectory_json",
    "write_csv",
    "write_json",
]
