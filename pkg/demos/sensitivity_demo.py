"""Three ways to bound how much one sample can move an estimate.

Closed-form bounds, a scan over the per-count table, and brute-force
enumeration of every dataset on a tiny alphabet. The exhaustive value is the
true sensitivity; the other two should never fall below it.

    python3 demos/sensitivity_demo.py
"""

import numpy as np

from inspectre import build_histogram
from inspectre.approx import entropy_term
from inspectre.coverage import make_sgt_config, sgt_estimate, sgt_sensitivity, sgt_table_sensitivity
from inspectre.entropy import empirical_entropy, empirical_entropy_sensitivity
from inspectre.privacy import additive_sensitivity, brute_sensitivity_oracle

print("plug-in entropy, alphabet 3")
for size in (2, 3, 5, 8):
    closed = empirical_entropy_sensitivity(size).delta
    table = additive_sensitivity(entropy_term(np.arange(size + 1) / size)).delta
    exact = brute_sensitivity_oracle(lambda s: empirical_entropy(s).value, size, 3).delta
    print(f"  n={size}: closed {closed:.4f}  table {table:.4f}  exhaustive {exact:.4f}")

print("\nnormalized coverage at twice the sample size, alphabet 3")
for size in (3, 5, 8):
    cfg = make_sgt_config(size, 2 * size, r=1.0)
    exact = brute_sensitivity_oracle(
        lambda s: sgt_estimate(build_histogram(s), cfg).normalized, size, 3
    ).delta
    print(
        f"  n={size}: closed {sgt_sensitivity(cfg).delta:.4f}  "
        f"table {sgt_table_sensitivity(cfg).delta:.4f}  exhaustive {exact:.4f}"
    )
