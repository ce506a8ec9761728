"""Filtering a harshly nonlinear scalar observation of a 10-state system.

The state decays toward zero under heavy process noise while the only
observation is ((1 + |x|^2)^2)^q plus noise -- a polynomial of degree 8q in
the state.  This demo runs one trajectory through two filters, then a small
Monte-Carlo comparison of all five cubature-style filters.
"""

import numpy as np

from srcf import (
    GrowthModel,
    IntegrationScheme,
    RngStream,
    run_filter,
    run_filter_bench,
    simulate_trajectory,
)

rng = RngStream(42)
model = GrowthModel(q=2, n=10)

print("Single trajectory, 40 steps: per-step estimation error |mean - truth|")
xs, ys = simulate_trajectory(model, 40, rng.substream("demo-traj"))
ssm = model.state_space()
init = model.init_belief()

for label, n_m in (("ckf3", 1), ("sif5", 10)):
    scheme = IntegrationScheme.from_label(label, n_m=n_m)
    posts = run_filter(ssm, scheme, ys, init, rng.substream("demo-filter", label))
    errs = [np.linalg.norm(b.mean - x) for b, x in zip(posts, xs[1:])]
    print(f"  {label:5s}: first 5 errors {np.round(errs[:5], 1)}  "
          f"mean over run {np.mean(errs):7.2f}")

print()
print("Monte-Carlo comparison (20 runs x 60 steps, common trajectories):")
schemes = [
    IntegrationScheme.from_label("ckf3"),
    IntegrationScheme.from_label("ckf5"),
    IntegrationScheme.from_label("sif3", n_m=50),
    IntegrationScheme.from_label("sif5", n_m=10),
    IntegrationScheme.from_label("qsif5", n_m=10),
]
series = run_filter_bench(model, schemes, 20, 60, rng.substream("demo-bench"))
for s in sorted(series, key=lambda s: s.values[10:].mean()):
    print(
        f"  {s.scheme:6s} steady RMSE {s.values[10:].mean():8.2f}   "
        f"peak {s.values.max():8.2f}   evaluations/integral {s.meta['points_per_integral']}"
    )

print()
print("The stochastic fifth-degree filter matches the best steady error and")
print("avoids the spikes deterministic cubature shows on this observation.")
