"""Equicorrelated Gaussian: what is left once the sample mean is known."""
import numpy as np

from identlab.gaussian_core import EquicorrSpec, conditional_given_mean, mean_law, schur_conditional_given_mean

# Two parameter sets that differ in mu and rho but share (1 - rho) * sigma2
a = EquicorrSpec(n=6, mu=0.0, sigma2=1.0, rho=0.2)
b = EquicorrSpec(n=6, mu=3.0, sigma2=2.0, rho=0.6)

for spec in (a, b):
    law = conditional_given_mean(spec, xbar=1.0)
    print(f"mu={spec.mu}, rho={spec.rho}: conditional diag {law.cov[0, 0]:.4f}, off-diag {law.cov[0, 1]:.4f}")

# closed form against generic conditioning of (X, Xbar)
dev = np.abs(conditional_given_mean(a, 1.0).cov - schur_conditional_given_mean(a, 1.0).cov).max()
print("max deviation from Schur conditioning:", dev)

# the mean itself keeps a variance floor of rho * sigma2
for n in (10, 100, 10_000):
    print(n, mean_law(EquicorrSpec(n, 0.0, 1.0, 0.5)).variance)
