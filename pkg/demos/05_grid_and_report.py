"""
A tiny grid search and its report
=================================

The grid runner appends one CSV row per (architecture, feature, H, seed) cell
and skips cells already in the file, so an interrupted grid resumes. The
report turns the rows into min-H tables. Everything here is deliberately
small; the numbers only illustrate the format.
"""
import tempfile
from pathlib import Path

from graphclf import DatasetSpec, build_dataset, grid

tmp = Path(tempfile.mkdtemp())
train_ds = build_dataset(DatasetSpec(10, (48, 96), 0))
medium_ds = build_dataset(DatasetSpec(4, (128, 192), 1, (0.0, 0.0, 1.0)))

spec = grid.GridSpec(("gin",), ("degree", "identity"), (2, 8), replications=2,
                     train={"epochs": 5, "batch_size": 40})
rows = grid.run_grid(spec, tmp / "results.csv", train_ds=train_ds, medium_ds=medium_ds)
print(f"{len(rows)} rows in {tmp / 'results.csv'}")

# a second call finds every cell already done and trains nothing
again = grid.run_grid(spec, tmp / "results.csv", train_ds=train_ds, medium_ds=medium_ds)
assert len(again) == len(rows)

###############################################################################
# Mean accuracy per cell, then the min-H table ("small, medium" per level,
# last line the share of 90%-capable H values that also generalise).
for key, e in grid.aggregate(rows).items():
    print(key, f"small {e['small_mean']:.2f}  medium {e['medium_mean']:.2f}")
print(grid.format_table(grid.results_table(rows)))
written, _ = grid.write_series(rows, tmp / "report")
print("series:", [p.name for p in written])
