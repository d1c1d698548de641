"""Semitrivial states, the cooperative change of variables, and the audit.

The bistable structure rests on a stack of hypotheses: the trivial state is
unstable, both semitrivial states are stable (H1), the boundary eigenvalue
gaps (B1) hold, the counter-propagation sum (B2) is positive, and every
interior coexistence state found by multistart is unstable (the (A2)
heuristic).  The audit evaluates all of them with margins.
"""

import numpy as np

from perifront import CompetitionSystem, PeriodicGrid, PeriodicFn
from perifront import cooperative_transform as ct
from perifront import steady_states as ss

L = 1.0
b = PeriodicFn(L, 1.0, (0.2,))
system = CompetitionSystem(
    L=L,
    d1=PeriodicFn.constant(1.0), d2=PeriodicFn.constant(1.0),
    a1=PeriodicFn.constant(0.0), a2=PeriodicFn.constant(0.0),
    b1=b, b2=b,
    a11=PeriodicFn.constant(1.0), a12=PeriodicFn.constant(1.5),
    a21=PeriodicFn.constant(1.5), a22=PeriodicFn.constant(1.0),
)
g = PeriodicGrid(L, 128)

state = ss.semitrivial_state(system.d1, system.a1, system.b1, system.a11, g)
print("Semitrivial state u1* for the pulsed growth rate b = 1 + 0.2 cos:")
print(f"  range [{state.samples.min():.6f}, {state.samples.max():.6f}], "
      f"residual {state.residual:.1e}, {state.stability} "
      f"(classifying eigenvalue {state.classifying_eigenvalue:+.4f})")

coop = ss.cooperative_from_competition(system, g)
print("\nCooperative coordinates (u1/u1*, 1 - u2/u2*):")
print(f"  starred competition ranges: a11* in [{coop.a11_star.min():.3f}, "
      f"{coop.a11_star.max():.3f}], a12* in [{coop.a12_star.min():.3f}, {coop.a12_star.max():.3f}]")
f1, f2 = ct.reaction(coop, slice(None), np.zeros(g.n), np.zeros(g.n))
print(f"  reaction at the 0 state: exactly ({np.max(np.abs(f1))}, {np.max(np.abs(f2))})")

print("\nMultistart coexistence search (these states are saddles, found by")
print("short marching plus Newton polish):")
states = ss.find_coexistence_states(coop, g, n_seeds=32, seed=0)
for s in states:
    u1, u2 = s.samples
    print(f"  interior state ~ ({np.mean(u1):.4f}, {np.mean(u2):.4f}): "
          f"lambda_hat = {s.classifying_eigenvalue:+.6f} -> {s.stability}")

print("\nFull assumption audit:")
rep = ss.audit_assumptions(system, g, n_seeds=32, seed=0)
print(f"  lambda0(d_i, a_i, b_i) = ({rep.lambda_00[0]:+.4f}, {rep.lambda_00[1]:+.4f})  [> 0]")
print(f"  (H1) eigenvalues       = ({rep.h1['values'][0]:+.4f}, {rep.h1['values'][1]:+.4f})  [< 0]")
print(f"  (B1) gaps              = ({rep.b1['margins'][0]:+.4f}, {rep.b1['margins'][1]:+.4f})  [> 0]")
print(f"  (B2) c1- + c2+         = {rep.b2['sum']:+.6f}  [> 0]")
print(f"  (A2) stable interior states found: {rep.a2_heuristic['violations']}")
print(f"  verdict: {'PASS' if rep.verdict else 'FAIL'}")
