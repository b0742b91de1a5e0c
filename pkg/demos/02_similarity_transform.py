#!/usr/bin/env python3
"""The raw clipped cosine is squashed toward the ends of [0, 1]; two beta-CDF
stages spread the scores out. This demo prints the transform and, when
matplotlib is importable, saves a picture next to this script.
"""

import numpy as np

from usagekit import BetaParams, beta_cdf
from usagekit.similarity import DEFAULT_STAGE1, DEFAULT_STAGE2

xs = np.linspace(0.0, 1.0, 21)

print(f"{'cosine':>8} {'stage 1':>9} {'stage 2':>9}")
for x in xs:
    s1 = beta_cdf(float(x), DEFAULT_STAGE1)
    s2 = beta_cdf(s1, DEFAULT_STAGE2)
    print(f"{x:8.2f} {s1:9.4f} {s2:9.4f}")

print()
print("stage 1 params:", DEFAULT_STAGE1)
print("stage 2 params:", DEFAULT_STAGE2)
print("identity check: beta_cdf(x, Beta(1,1)) == x ->",
      beta_cdf(0.37, BetaParams(1.0, 1.0)))

try:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
except ImportError:
    print("matplotlib not installed; skipping the plot")
else:
    grid = np.linspace(0.0, 1.0, 200)
    stage1 = [beta_cdf(float(x), DEFAULT_STAGE1) for x in grid]
    chained = [beta_cdf(s, DEFAULT_STAGE2) for s in stage1]
    fig, ax = plt.subplots(figsize=(5, 4))
    ax.plot(grid, grid, ":", label="identity")
    ax.plot(grid, stage1, label="after stage 1")
    ax.plot(grid, chained, label="after both stages")
    ax.set_xlabel("clipped cosine")
    ax.set_ylabel("sim")
    ax.legend()
    fig.tight_layout()
    out = __file__.replace(".py", ".png")
    fig.savefig(out, dpi=120)
    print("wrote", out)
