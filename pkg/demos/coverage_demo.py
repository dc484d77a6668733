"""Predicting how many distinct symbols a larger sample would contain.

Draw a sample of half the alphabet, then extrapolate to horizons up to ten
times that size, with and without privacy noise. Values are divided by the
horizon, which is how the sensitivity is calibrated.

    python3 demos/coverage_demo.py
"""

import numpy as np

from inspectre import DiscreteDistribution, exact_support_coverage, sample_histogram
from inspectre.coverage import make_sgt_config, private_support_coverage, sgt_estimate, support_size_estimate

alphabet = 2000
dist = DiscreteDistribution.uniform(alphabet)
rng = np.random.default_rng(3)
size = alphabet // 2
hist = sample_histogram(dist, size, rng)
print(f"{size} samples, {hist.distinct} distinct symbols seen\n")

print(f"{'horizon':>8} {'truth':>8} {'estimate':>9} {'eps=1':>8} {'eps=10':>8}")
for ratio in (1, 2, 4, 7, 10):
    horizon = size * ratio
    cfg = make_sgt_config(size, horizon)
    guess = sgt_estimate(hist, cfg).normalized
    noisy = [private_support_coverage(hist, horizon, eps, rng=rng).value for eps in (1.0, 10.0)]
    truth = exact_support_coverage(dist, horizon) / horizon
    print(f"{horizon:>8} {truth:>8.4f} {guess:>9.4f} {noisy[0]:>8.4f} {noisy[1]:>8.4f}")

# Support size, assuming every present symbol has mass at least 1/alphabet.
# Extrapolating this far needs more data than the sample above, so draw more.
# Past half the horizon the raw distinct count is released instead.
print(f"\ntrue support size {alphabet}, target accuracy +/- {0.1 * alphabet:.0f}")
for size in (2500, 4000):
    hist = sample_histogram(dist, size, rng)
    for eps in (None, 1.0):
        est = support_size_estimate(hist, alphabet, 0.1, eps, rng)
        label = "non-private" if eps is None else f"eps={eps}"
        print(f"support size from {size} samples ({label}): {est.value:.1f}, "
              f"{est.branch} branch, {hist.distinct} seen")
