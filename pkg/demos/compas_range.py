"""
How far can statistical parity move among near-optimal COMPAS models?
=====================================================================

Fit a logistic benchmark on half of the COMPAS data, then search every
model whose loss is within 1% of it for the smallest and largest gap in
mean score between African-American and other defendants.
"""
from pathlib import Path

from goodset import audit

CONFIG = Path(__file__).resolve().parents[1] / "configs" / "compas.yaml"

# the shipped config: logistic loss, decile scores divided by ten as the deployed tool
report = audit.run_range_audit(audit.load_config(CONFIG))

###############################################################################
# The deployed tool sits above the whole interval the good set can reach.
rng = report.summary["range"]
print(f"COMPAS SP      {rng['benchmark']:+.4f} (se {rng['benchmark_se']:.4f})")
print(f"good-set range [{rng['min']:+.4f}, {rng['max']:+.4f}]")

###############################################################################
# Each endpoint is a randomized model over at most two linear scorers.
for name in ("min", "max"):
    run = report.summary["runs"][name]
    print(f"{name}: status={run['status']}, iterations={run['iterations']}, "
          f"support={run['model']['support']}, certificate passed={run['certificate']['passed']}")

###############################################################################
# Test-split metrics for the benchmark and both endpoints.
for row in report.metrics:
    print(f"{row['model']:>9}  loss {row['loss']:.4f}  auc {row['auc']:.3f}  SP {row['disparity']:+.4f}")
