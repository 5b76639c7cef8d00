"""Walk through the order-by-order normalization of the bundled dissipative
pendulum problem and print every piece of the construction in closed form.

The system is

    dx/dt = y - mu (sin(x - t) + sin(x))
    dy/dt = -eps (sin(x - t) + sin(x)) - mu (y - drift)

The toolkit removes the conservative oscillations with generating functions,
then the dissipative ones with angle/action corrections, choosing the drift
order by order as the average of the residual action equation.  Everything
below is exact rational arithmetic; compare the printed fractions with the
output of `driftnf normalize problems/e19.problem --order 2`.
"""
import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from driftnf.literals import format_series
from driftnf.problem import load_problem
from driftnf.transform import build_normal_form

problem = load_problem(os.path.join(os.path.dirname(__file__), "..",
                                    "problems", "e19.problem"))
result = build_normal_form(problem.spec(), N=2, K=20)

print("generating functions (conservative phase):")
for n, psi in enumerate(result.psis, start=1):
    print(f"  psi_{n}0 = {format_series(psi)}")

print("\nangle/action corrections (dissipative phase):")
for (j, p), comps in sorted(result.alphas.items()):
    print(f"  alpha_{j}{p} = {format_series(comps[0])}")
for (j, p), comps in sorted(result.betas.items()):
    print(f"  beta_{j}{p} = {format_series(comps[0])}")

print("\ndrift (note the sign convention dy/dt = ... + mu (g01 - eta)):")
print(f"  eta = {format_series(result.eta_series()[0])}")

print("\nnormalized frequency:")
print(f"  Omega_d = {format_series(result.omega_d_series()[0])}")

print("\nthe defining invariant, checked symbolically during the build:")
resid = result.ydot_final[0].up_to_grading(2).project_modes(20, "le")
print(f"  low-order action variation: {format_series(resid)}")
print(f"\nterm counts: {result.term_counts}")
