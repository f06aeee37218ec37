"""Binary models: i.i.d., constant, and the alternating mixture."""
import numpy as np

from identlab._random import substream
from identlab.models import BinarySpec, m5_marginals, sample_binary, solve_m5_r

p = 0.25
r = solve_m5_r(p)
print("mixing weight:", r, "exact marginals:", m5_marginals(p, r, horizon=6))
x = sample_binary(BinarySpec("M5", p), 12, substream(6), size=50_000)
print("empirical marginals:", np.round(x.mean(axis=0), 3))

for variant in ("M3", "M4"):
    y = sample_binary(BinarySpec(variant, 0.5), 10, substream(7), size=50_000)
    m = y.mean(axis=1)
    print(variant, "P(all equal) =", np.mean((m == 0) | (m == 1)))
