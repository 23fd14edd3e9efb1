"""
Rerunning the published simulation tables
=========================================

Each cell of a table is a (law, sample size) pair; every replication draws
from its own seeded stream, so results do not depend on thread count. A
full rerun uses 500 replications per cell (a few minutes); this script uses
a small budget and a loose tolerance to keep it quick.
"""

from standardness.experiments import compare_to_reference, load_reference, run_experiment, table_spec

# %%
# Twenty replications of the radial-law table.
spec = table_spec(3, replications=20, parallelism=2)
report = run_experiment(spec)
for cell in report.cells:
    print(f"{cell.dist_id} n={cell.n}: plug-in {cell.mean_hat:.4f}  corrected {cell.mean_tilde:.4f}"
          f"  (true {cell.upsilon_true:.4f}, r = {cell.r_used:.3f})")

# %%
# Compare with the published means. With 20 replications the Monte Carlo
# error is about five times that of the published runs, so the tolerance
# is widened accordingly.
for verdict in compare_to_reference(report, load_reference(3), tolerance=0.015):
    print(verdict.line())

# %%
# The report exports as CSV for plotting elsewhere.
print(report.to_csv().splitlines()[0])
