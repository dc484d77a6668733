"""Pairs of distributions that are hard to tell apart.

Each pair is close in total variation but differs in a property. Any private
estimator accurate enough to separate them needs roughly 1/(eps * tv)
samples, which is the floor printed here.

    python3 demos/lower_bounds_demo.py
"""

from inspectre.lowerbounds import coverage_pair, dp_sample_floor, entropy_eta, entropy_pair, supportsize_pair

print(f"{'property':<13} {'accuracy':>8} {'gap':>10} {'tv':>8} {'floor@eps=1':>12}")
for accuracy in (0.3, 0.1, 0.03):
    pairs = (
        coverage_pair(1000, accuracy),
        supportsize_pair(1000, accuracy),
        entropy_pair(1000, entropy_eta(accuracy, 1000)),
    )
    for pair in pairs:
        floor = dp_sample_floor(pair, 1.0)
        print(f"{pair.property_tag:<13} {accuracy:>8} {pair.gap:>10.4f} {pair.tv:>8.4f} {floor:>12}")
