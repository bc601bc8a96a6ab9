"""
Success and iteration counts across dimensions
==============================================

Fix s=10 and m = floor(2.5 s (ln n + ln 100)), then vary n. Iteration counts
grow with n while the success rate stays high.
"""

# %%
from stormspar import ExperimentSpec, aggregate, run_experiment

spec = ExperimentSpec(kind="dimension_table", n_values=[100, 200, 300, 500],
                      s_values=[10], sample_factors=[2.5], sigma_values=[0.01],
                      trials=20, base_seed=5)
print(f"{'n':>6} {'s':>4} {'m':>5} {'rate':>6} {'aver iter':>10}")
for row in aggregate(run_experiment(spec)):
    print(f"{row.n:6d} {row.s:4d} {row.m:5d} {row.success_rate:6.2f} {row.aver_iter:10d}")

# %%
# The same table from the shell:
#
#   stormspar table --kind dimension --n 100,200,300,500 --trials 20 --output-path dim/
