"""One long correlated sequence versus many short independent ones."""
import numpy as np

from identlab._random import substream
from identlab.estimators import rho_hat_from_stats, rho_mle_replicated, residual_sum_squares
from identlab.gaussian_core import EquicorrSpec
from identlab.models import sample_m1

for n in (100, 2000):
    spec = EquicorrSpec(n, 0.0, 1.0, 0.5)
    x = sample_m1(spec, substream(3, n), size=2000)
    r = rho_hat_from_stats(n, x.mean(axis=1), residual_sum_squares(x), 0.0)
    q1, q3 = np.percentile(r, [25, 75])
    print(f"single sequence n={n:5d}: IQR of rho_hat {q3 - q1:.3f}")

spec = EquicorrSpec(10, 0.0, 1.0, 0.5)
for R in (100, 5000):
    r = [rho_mle_replicated(sample_m1(spec, substream(4, R, i), size=R), 0.0).rho_hat for i in range(300)]
    q1, q3 = np.percentile(r, [25, 75])
    print(f"{R:5d} independent length-10 sequences: IQR {q3 - q1:.3f}")
