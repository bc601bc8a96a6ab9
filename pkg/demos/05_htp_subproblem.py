"""
The inner solver against brute force
====================================

With correct signs the inner problem is ordinary compressed sensing. On
small instances we can enumerate every support and check that HTP finds the
best one.
"""

# %%
import numpy as np

from stormspar import HtpConfig, htp_solve
from stormspar.experiments import best_support_residual, htp_benchmark

r = np.random.default_rng(0)
A = r.standard_normal((15, 20))
x = np.zeros(20)
x[[4, 13]] = [1.2, -0.8]
b = A @ x
res = htp_solve(A, b, 2)
print("support", res.support, "inner iterations", res.inner_iters)
print("HTP residual", np.linalg.norm(A @ res.solution - b),
      "best possible", best_support_residual(A, b, 2))

# %%
# Agreement rate over many instances, for a few step sizes.
for mu in (0.5, 1.0, 1.5, 2.5):
    rows = htp_benchmark(trials=100, base_seed=1, config=HtpConfig(step_size=mu))
    print(f"mu={mu}: {sum(r['match'] for r in rows)}/100")
