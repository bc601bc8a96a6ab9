"""
Success rate against sample size
================================

Sweep m over multiples of K = floor(s (ln n + ln 100)) and estimate the
probability of recovery at each point. At n=200, s=10 the curve rises between
m/K = 0.4 and 0.8. Twenty trials per point take several minutes on one core;
raise ``trials`` for smoother curves.
"""

# %%
from stormspar import ExperimentSpec, aggregate, default_sample_size, run_experiment

n, s = 200, 10
print("K =", default_sample_size(n, s, 1.0))
spec = ExperimentSpec(
    kind="phase_transition",
    n_values=[n],
    s_values=[s],
    sample_factors=[0.4, 0.6, 0.8, 1.0, 1.5, 2.0],
    sigma_values=[0.01],
    trials=20,
    base_seed=11,
    max_outer_iters=2000,
)
rows = aggregate(run_experiment(spec, worker_count=2))

# %%
for row in rows:
    print(f"m/K={row.factor:4.2f}  m={row.m:4d}  success={row.success_rate:.2f}  "
          f"aver iter={row.aver_iter}")

# %%
# Plot if matplotlib is around.
try:
    import matplotlib.pyplot as plt
except ImportError:
    plt = None
if plt is not None:
    plt.plot([r.factor for r in rows], [r.success_rate for r in rows], "o-")
    plt.xlabel("m / K")
    plt.ylabel("success rate")
    plt.ylim(0, 1.05)
    plt.savefig("phase_transition.png", dpi=120)
