"""Constraint chains and brackets for the lifted oscillator.

Starting from the primary constraints the chain is extended by repeated time
derivatives until a new member is a combination of earlier ones. For equal
springs it closes after four members, which form a second-class set; for
unequal springs it only closes once the whole phase space is pinned down.
"""

import numpy as np

from ostrogradsky import build_constraint_chain, constraint_matrix, dirac_bracket
from ostrogradsky import oscillator as osc
from ostrogradsky.constraints import coordinate
from ostrogradsky.system import CanonicalSystem

np.set_printoptions(precision=4, suppress=True)
rng = np.random.default_rng(3)

for label, params in [
    ("equal springs", osc.OscillatorParams.isotropic(m=1.0, h=1.0, lam=1.0)),
    ("springs 1, 2, 3", osc.OscillatorParams(1.0, 1.0, 2.0, 3.0, 1.0)),
]:
    system = CanonicalSystem(osc.make_oscillator(params))
    chain = build_constraint_chain(system)
    print(f"{label}: closes={chain.closure.closed} at level {chain.closure.level}")
    print(f"  members {list(chain.names)}, redundant {[r[0] for r in chain.redundant]}")
    print(f"  closing coefficients {np.atleast_2d(chain.closure.coefficients)[0]}")

params = osc.OscillatorParams.isotropic(m=1.0, h=0.5, lam=1.2)
cs = osc.isotropic_constraint_set(params)
x = rng.uniform(-1, 1, 8)
C = constraint_matrix(cs, x)
print(f"\nbracket matrix at a random point (Omega = {params.Omega:.3f}):\n{C}")
print(f"closed form agrees to {np.max(np.abs(C - osc.isotropic_bracket_matrix(params))):.1e}, det = {np.linalg.det(C):.4f}")

# Dirac brackets of the coordinates with any constraint vanish identically
Q11 = coordinate("Q1", 0)
worst = max(abs(dirac_bracket(Q11, lambda z, a=a: cs.values(z)[a], cs, x)) for a in range(4))
print(f"max Dirac bracket of Q1_1 with a constraint: {worst:.1e}")
P11 = coordinate("P1", 0)
print(f"Dirac bracket of Q1_1 and P1_1: {dirac_bracket(Q11, P11, cs, x):.6f} (Poisson bracket is 1)")
