"""Tour of the integration rules: point sets, weights, and exactness.

Builds one draw of every scheme in dimension 4, shows how many points each
uses, and verifies the Gaussian moments each rule reproduces exactly.
"""

import numpy as np

from srcf import IntegrationScheme, RngStream, build_rule, reported_eval_count

rng = RngStream(2024)
n = 4

print("=" * 64)
print(f"Integration rules in dimension n = {n}")
print("=" * 64)

schemes = [
    IntegrationScheme.from_label("ckf3"),
    IntegrationScheme.from_label("ckf5"),
    IntegrationScheme.from_label("sif3"),
    IntegrationScheme.from_label("sif5"),
    IntegrationScheme.from_label("qsif5"),
    IntegrationScheme.from_label("mc", mc_samples=500),
]

for scheme in schemes:
    ps = build_rule(scheme, n, rng.substream(scheme.label))
    w, c = ps.weights, ps.points
    mean_err = np.abs(w @ c).max()
    cov_err = np.abs(np.einsum("p,pi,pj->ij", w, c, c) - np.eye(n)).max()
    x4 = w @ c[:, 0] ** 4  # E[c1^4] = 3 for degree-5 rules
    print(
        f"{scheme.label:6s} stored points {c.shape[0]:4d}  "
        f"operating count {ps.eval_count:4d}  "
        f"sum(w)-1 {abs(w.sum() - 1):.1e}  |mean| {mean_err:.1e}  "
        f"|cov-I| {cov_err:.1e}  E[c1^4] {x4:8.4f}"
    )

print()
print("Fifth-degree rules hit E[c1^4] = 3 on every draw; third-degree rules")
print("land elsewhere (the 2n-point rule gives exactly n), and Monte-Carlo")
print("is only right on average.")

print()
print("Weights of one SIF5 draw vary with the sampled radii:")
for draw in range(3):
    ps = build_rule(IntegrationScheme.from_label("sif5"), n, rng)
    print(
        f"  draw {draw}: center weight {ps.weights[0]:+.4f}, "
        f"min/max shell weight {ps.weights[1:].min():+.5f}/{ps.weights[1:].max():+.5f}"
    )
