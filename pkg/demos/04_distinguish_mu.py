"""A single set separating two means whatever the correlation."""
from identlab._random import substream
from identlab.distinguish import check_distinguishing, m1_sampler, mu_distinguishing_set

A = mu_distinguishing_set(0.0, 1.0)
for rho in (0.0, 0.5, 0.9):
    rep = check_distinguishing(A, m1_sampler(0.0, 1.0, rho), m1_sampler(1.0, 1.0, rho),
                               n=20, alpha=None, beta=None, reps=20_000, stream=substream(5))
    print(f"rho={rho}: P1={rep.p1_hat:.3f} P2={rep.p2_hat:.3f} -> {rep.verdict}")
