#!/usr/bin/env python3
"""Two ways to put the uncertainty values to work.

Deferral: keep a prediction when u <= t, send it to a (perfect) expert
otherwise.  Total cost is deferrals + c * kept errors, linear in the error
cost c, so comparing two uncertainty methods yields an interval of c where
one is cheaper.

Drift: fit a Gaussian to the uncertainty values of a reference window and
of a live stream; the KL distance between the fits rises as the stream
fills with out-of-distribution inputs.
"""

import os

import numpy as np

from logit_uncertainty import cost_bound_sweep, deferral_cost, drift_sweep

OUT = os.path.join(os.path.dirname(__file__), "output")
os.makedirs(OUT, exist_ok=True)

rng = np.random.default_rng(21)
n = 2000

# a sharp method: uncertainty correlates with correctness
correct = rng.uniform(size=n) < 0.85
u_sharp = np.where(correct, rng.beta(2, 8, size=n), rng.beta(8, 2, size=n))
# a blunt method: uncertainty barely separates errors
u_blunt = np.clip(u_sharp + rng.normal(0, 0.35, size=n), 0.0, 1.0)

print("total cost at error cost c = 4:")
for t in (0.2, 0.5, 0.8):
    cost_a = deferral_cost(u_sharp, correct, t, 4.0)
    cost_b = deferral_cost(u_blunt, correct, t, 4.0)
    print(f"  t={t}: sharp {cost_a:7.0f}   blunt {cost_b:7.0f}")

rows = cost_bound_sweep(
    u_sharp, correct, u_blunt, correct,
    thresholds=[t / 10 for t in range(1, 10)],
    out_path=os.path.join(OUT, "cost_bounds.csv"),
)
print("\nerror-cost interval where the sharp method is cheaper:")
for r in rows:
    if r.bound.empty:
        print(f"  t={r.threshold:.1f}: never")
    else:
        hi = "inf" if np.isinf(r.bound.c_high) else f"{r.bound.c_high:.2f}"
        print(f"  t={r.threshold:.1f}: c in ({r.bound.c_low:.2f}, {hi})")

# --- drift monitoring -----------------------------------------------------

reference = rng.beta(2, 8, size=20000)          # healthy traffic
contaminated = rng.uniform(0.85, 1.0, size=10000)  # off-distribution traffic

rows = drift_sweep(
    reference,
    contaminated,
    fractions=[i / 10 for i in range(11)],
    n_stream=10000,
    seed=3,
    out_path=os.path.join(OUT, "drift.csv"),
)
print("\ncontamination -> KL drift distance:")
for fraction, kl in rows:
    bar = "#" * int(min(kl, 12.0) * 4)
    print(f"  {fraction:4.0%}  {kl:8.4f}  {bar}")
print(f"\nwrote {OUT}/cost_bounds.csv and {OUT}/drift.csv")
