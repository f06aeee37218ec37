"""Built-in experiments: one per verification preset.

Each experiment takes a parameter dict (defaults merged with the config),
a seed and a thread count, and returns CSV tables, a JSON summary and a
list of pass/fail checks. All randomness flows from ``substream(seed,
...)`` keyed by experiment and block, so outputs are byte-identical for a
fixed seed whatever the thread count.
"""
from __future__ import annotations

import csv
import io
import time
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import norm

from identlab._random import run_blocks, substream
from identlab._stats import binomial_se, clopper_pearson, ks_two_sample
from identlab.distinguish import (
    check_distinguishing, extreme_mean_set, half_mean_set, location_invariant_set,
    m1_sampler, mean_above_set, mu_distinguishing_set, power_curve_integral,
    reports_to_csv,
)
from identlab.estimators import (
    changepoint_pvalues, rho_hat_from_stats, rho_mle_replicated, var_components_m2,
)
from identlab.gaussian_core import (
    EquicorrSpec, conditional_given_mean, mean_law, schur_conditional_given_mean,
)
from identlab.kmeans import (
    brute_force_kmeans, lloyd, membership_consistency_experiment, misclassification_floor,
)
from identlab.models import (
    BinarySpec, FixedClassSpec, TwoLevelSpec, associated_mixture, base_sampler_from_dict,
    m5_marginals, matched_pair, sample_binary, sample_m1, sample_m2, solve_m5_r,
)


@dataclass
class Check:
    name: str
    passed: bool
    detail: str = ""

    def __post_init__(self):
        self.passed = bool(self.passed)


@dataclass
class Table:
    columns: list[str]
    rows: list[list] = field(default_factory=list)

    def add(self, *values):
        self.rows.append(list(values))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.columns)
        for row in self.rows:
            w.writerow([_fmt(v) for v in row])
        return buf.getvalue()

    def column(self, name: str) -> list:
        i = self.columns.index(name)
        return [r[i] for r in self.rows]


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


@dataclass
class ExperimentResult:
    tables: dict[str, Table]
    summary: dict
    checks: list[Check]
    csv_text: dict[str, str] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def csvs(self) -> dict[str, str]:
        out = {name: t.to_csv() for name, t in self.tables.items()}
        out.update(self.csv_text)
        return out


def _var_se(v: float, reps: int) -> float:
    """Standard error of a Gaussian sample variance."""
    return v * np.sqrt(2.0 / (reps - 1))


def _iqr(x) -> float:
    q1, q3 = np.percentile(x, [25, 75])
    return float(q3 - q1)


# ---------------------------------------------------------------------------

def verify_lemma1(p: dict, seed: int, threads: int) -> ExperimentResult:
    t = Table(["n", "rho", "sigma2", "xbar", "max_dev_mean", "max_dev_cov",
               "mu_invariant", "max_row_sum"])
    worst = 0.0
    invariant = True
    for n in p["n_values"]:
        for rho in p["rho_values"]:
            for xbar in p["xbar_values"]:
                spec = EquicorrSpec(n, p["mu"], p["sigma2"], rho)
                closed = conditional_given_mean(spec, xbar)
                schur = schur_conditional_given_mean(spec, xbar)
                dm = float(np.max(np.abs(closed.mean - schur.mean)))
                dc = float(np.max(np.abs(closed.cov - schur.cov)))
                other = conditional_given_mean(EquicorrSpec(n, p["mu"] + 7.0, p["sigma2"], rho), xbar)
                inv = bool(np.array_equal(other.mean, closed.mean) and np.array_equal(other.cov, closed.cov))
                invariant &= inv
                worst = max(worst, dm, dc)
                t.add(n, rho, p["sigma2"], xbar, dm, dc, inv,
                      float(np.max(np.abs(closed.cov.sum(axis=1)))))
    checks = [
        Check("closed form matches Schur conditioning (max-norm < 1e-9)", worst < 1e-9, f"max deviation {worst:.3e}"),
        Check("conditional law does not depend on mu", invariant),
    ]
    return ExperimentResult({"lemma1": t}, {"max_deviation": worst}, checks)


def mean_variance(p: dict, seed: int, threads: int) -> ExperimentResult:
    t = Table(["n", "reps", "var_hat", "se", "exact", "z"])
    checks = []
    for i, (n, reps) in enumerate(zip(p["n_values"], p["reps_per_n"])):
        spec = EquicorrSpec(n, p["mu"], p["sigma2"], p["rho"])
        block = max(1, 2_000_000 // n)

        def means(rng, size, spec=spec):
            return sample_m1(spec, rng, size=size).mean(axis=1)

        xbar = run_blocks(means, reps, seed, key=(1, i), threads=threads, block=block)
        v = float(np.var(xbar, ddof=1))
        exact = mean_law(spec).variance
        se = _var_se(exact, reps)
        z = (v - exact) / se
        t.add(n, reps, v, se, exact, z)
        checks.append(Check(f"Var(Xbar_{n}) within 3 SE of {exact:.6g}", abs(z) <= 3, f"z = {z:.2f}"))
    return ExperimentResult({"mean_variance": t}, {}, checks)


def matched_pair_experiment(p: dict, seed: int, threads: int) -> ExperimentResult:
    rho1, s1, rho2 = p["rho1"], p["sigma1_2"], p["rho2"]
    s2 = matched_pair(rho1, rho2, s1)
    n, reps = p["n"], p["reps"]
    ks = Table(["comparison", "rho1", "sigma1_2", "rho2", "sigma2_2", "n", "reps",
                "ks_statistic", "p_value", "rejects_0.001"])
    results = {}
    for j, (label, s2_used) in enumerate((("matched", s2), ("unmatched", p["control_sigma2_2"]))):
        a = sample_m1(EquicorrSpec(n, 0.0, s1, rho1), substream(seed, 3, j, 1), size=reps)
        b = sample_m1(EquicorrSpec(n, 0.0, s2_used, rho2), substream(seed, 3, j, 2), size=reps)
        rss = lambda x: np.sum((x - x.mean(axis=1, keepdims=True)) ** 2, axis=1)
        rep = ks_two_sample(rss(a), rss(b))
        results[label] = rep
        ks.add(label, rho1, s1, rho2, s2_used, n, reps, rep.statistic, rep.pvalue, rep.rejects(0.001))

    grid = np.arange(p["grid_lo"], p["grid_hi"] + 1e-9, p["grid_step"])
    curve = Table(["mu", "diff", "diff_se"])
    integrals = Table(["set", "integral", "se", "z", "max_pointwise_z"])
    sets = [mean_above_set(0.0),
            location_invariant_set(lambda r: np.sum(r**2, axis=1) / (r.shape[1] - 1),
                                   p["invariant_threshold"], "s2 > c")]
    ints = {}
    for j, s in enumerate(sets):
        res = power_curve_integral(s, (s1, rho1), (s2, rho2), grid, p["curve_n"],
                                   p["curve_reps"], substream(seed, 4, j))
        ints[s.name] = res
        z = res.integral / res.se if res.se > 0 else 0.0
        integrals.add(s.name, res.integral, res.se, z, res.max_pointwise_z)
        if j == 0:
            for mu, d, e in zip(res.mu_grid, res.diff, res.diff_se):
                curve.add(float(mu), float(d), float(e))
    main = ints[sets[0].name]
    checks = [
        Check("matched pair: KS on residual SS does not reject at 0.001",
              not results["matched"].rejects(0.001), f"p = {results['matched'].pvalue:.4g}"),
        Check("unmatched control: KS rejects at 0.001",
              results["unmatched"].rejects(0.001), f"p = {results['unmatched'].pvalue:.4g}"),
        Check("power-curve integral of {xbar > 0} is 0 within 3 SE",
              abs(main.integral) <= 3 * main.se, f"{main.integral:.4g} +/- {main.se:.3g}"),
        Check("pointwise difference exceeds 5 SE somewhere", main.max_pointwise_z > 5,
              f"max z = {main.max_pointwise_z:.2f}"),
    ]
    return ExperimentResult({"residual_ks": ks, "power_curve": curve, "integrals": integrals},
                            {"sigma2_2": s2}, checks)


def rho_nonconsistency(p: dict, seed: int, threads: int) -> ExperimentResult:
    mu, s2, rho = p["mu"], p["sigma2"], p["rho"]
    t = Table(["design", "size", "reps", "median", "q25", "q75", "iqr"])
    iqr_single = []
    for i, n in enumerate(p["n_values"]):
        spec = EquicorrSpec(n, mu, s2, rho)

        def est(rng, size, spec=spec):
            x = sample_m1(spec, rng, size=size)
            xbar = x.mean(axis=1)
            ss = np.sum((x - xbar[:, None]) ** 2, axis=1)
            return rho_hat_from_stats(spec.n, xbar, ss, mu)

        r = run_blocks(est, p["reps"], seed, key=(5, 1, i), threads=threads,
                       block=max(1, 2_000_000 // n))
        q25, q50, q75 = np.percentile(r, [25, 50, 75])
        iqr_single.append(q75 - q25)
        t.add("single sequence", n, p["reps"], q50, q25, q75, q75 - q25)

    iqr_rep = []
    L = p["replicate_length"]
    spec = EquicorrSpec(L, mu, s2, rho)
    for i, R in enumerate(p["replicate_counts"]):
        def est(rng, size, R=R):
            return np.array([rho_mle_replicated(sample_m1(spec, rng, size=R), mu).rho_hat
                             for _ in range(size)])

        r = run_blocks(est, p["replicate_reps"], seed, key=(5, 2, i), threads=threads,
                       block=max(1, 200_000 // (R * L)))
        q25, q50, q75 = np.percentile(r, [25, 50, 75])
        iqr_rep.append(q75 - q25)
        t.add(f"{R} independent length-{L} sequences", R, p["replicate_reps"], q50, q25, q75, q75 - q25)

    ratio = iqr_single[0] / iqr_single[-1]
    shrink = iqr_rep[0] / iqr_rep[-1]
    checks = [
        Check("single-sequence IQR ratio in [0.8, 1.25]", 0.8 <= ratio <= 1.25, f"ratio = {ratio:.3f}"),
        Check("replicated-design IQR shrinks at least 3x", shrink >= 3, f"shrink = {shrink:.2f}"),
    ]
    return ExperimentResult({"rho_hat": t}, {"iqr_ratio": ratio, "replicated_shrink": shrink}, checks)


def mu_distinguish(p: dict, seed: int, threads: int) -> ExperimentResult:
    mu1, mu2, n, reps = p["mu1"], p["mu2"], p["n"], p["reps"]
    A = mu_distinguishing_set(mu1, mu2)
    reports, checks = [], []
    for i, (s2, rho) in enumerate((s2, rho) for s2 in p["sigma2_values"] for rho in p["rho_values"]):
        rep = check_distinguishing(A, m1_sampler(mu1, s2, rho), m1_sampler(mu2, s2, rho), n,
                                   0.5, 0.5, reps, substream(seed, 6, i), level=p["ci_level"])
        swapped = check_distinguishing(A, m1_sampler(mu1, s2, rho), m1_sampler(mu2, s2, rho), n,
                                       0.5, 0.5, reps, substream(seed, 6, i), level=p["ci_level"],
                                       swap=True)
        reports += [rep, swapped]
        ok = rep.ci1.upper < 0.5 < rep.ci2.lower
        checks.append(Check(f"sigma2={s2:g}, rho={rho:g}: CI under mu1 below 0.5, under mu2 above 0.5",
                            ok, f"[{rep.ci1.lower:.4f}, {rep.ci1.upper:.4f}] vs "
                                f"[{rep.ci2.lower:.4f}, {rep.ci2.upper:.4f}]"))
        checks.append(Check(f"sigma2={s2:g}, rho={rho:g}: swapped direction gives the same verdict",
                            str(swapped.verdict) == str(rep.verdict), f"{rep.verdict} / {swapped.verdict}"))
    return ExperimentResult({}, {}, checks, {"mu_distinguish": reports_to_csv(reports)})


def m2_components(p: dict, seed: int, threads: int) -> ExperimentResult:
    t = Table(["group_sizes", "n", "reps", "tau2_2_mean", "tau2_2_sd", "tau2_2_first",
               "single_se", "grand_mean_sd", "expected_sd"])
    stats = []
    for i, mult in enumerate(p["n_multipliers"]):
        sizes = tuple(int(s * mult) for s in p["group_sizes"])
        spec = TwoLevelSpec(p["mu"], p["tau1_2"], p["tau2_2"], sizes)

        def est(rng, size, spec=spec):
            out = np.empty((size, 2))
            for r in range(size):
                e = var_components_m2(sample_m2(spec, rng))
                out[r] = e.tau2_2_hat, e.grand_mean
            return out

        res = run_blocks(est, p["reps"], seed, key=(7, i), threads=threads, block=100)
        w = np.array(sizes) / spec.n
        expected = float(np.sqrt(spec.tau1_2 * np.sum(w**2) + spec.tau2_2 / spec.n))
        single_se = float(np.sqrt(2 * spec.tau2_2**2 / (spec.n - spec.m)))
        row = dict(mean=res[:, 0].mean(), sd=res[:, 0].std(ddof=1), first=res[0, 0],
                   gsd=res[:, 1].std(ddof=1), expected=expected, single_se=single_se, n=spec.n)
        stats.append(row)
        t.add(" ".join(map(str, sizes)), spec.n, p["reps"], row["mean"], row["sd"], row["first"],
              single_se, row["gsd"], expected)

    base, big = stats[0], stats[-1]
    target = np.sqrt(p["tau1_2"] / len(p["group_sizes"]))
    tol_sd = 3 * np.sqrt(2) * base["gsd"] / np.sqrt(2 * (p["reps"] - 1))
    mean_se = base["sd"] / np.sqrt(p["reps"])
    checks = [
        Check(f"tau2_2_hat within 4 SE of tau2_2 at n={base['n']} (single replicate)",
              abs(base["first"] - p["tau2_2"]) <= 4 * base["single_se"],
              f"{base['first']:.5f} vs {p['tau2_2']} (SE {base['single_se']:.4f})"),
        Check("replicate mean of tau2_2_hat within 4 SE of tau2_2",
              abs(base["mean"] - p["tau2_2"]) <= 4 * mean_se, f"{base['mean']:.5f} (SE {mean_se:.2g})"),
        Check("grand-mean SD within 10% of sqrt(tau1_2 / m)",
              abs(base["gsd"] - target) <= 0.1 * target, f"{base['gsd']:.4f} vs {target:.4f}"),
        Check(f"grand-mean SD does not decrease when n grows {p['n_multipliers'][-1]}x",
              big["gsd"] >= base["gsd"] - tol_sd, f"{base['gsd']:.4f} -> {big['gsd']:.4f}"),
    ]
    return ExperimentResult({"m2_components": t}, {}, checks)


def binary_distinguish(p: dict, seed: int, threads: int) -> ExperimentResult:
    reps, n = p["reps"], p["n"]
    A = extreme_mean_set()
    t = Table(["model", "p", "n", "reps", "set", "p_hat", "se", "exact", "z"])
    checks = []
    for i, prob in enumerate(p["p_values"]):
        x3 = sample_binary(BinarySpec("M3", prob), n, substream(seed, 8, 1, i), size=reps)
        hat = float(A.hits(x3).mean())
        exact = prob**n + (1 - prob) ** n
        se = binomial_se(exact, reps)
        z = (hat - exact) / se
        t.add("M3", prob, n, reps, A.name, hat, se, exact, z)
        checks.append(Check(f"M3 p={prob:g}: P(A_n) matches p^n+(1-p)^n within 3 SE", abs(z) <= 3, f"z = {z:.2f}"))

        x4 = sample_binary(BinarySpec("M4", prob), n, substream(seed, 8, 2, i), size=reps)
        hits4 = int(A.hits(x4).sum())
        t.add("M4", prob, n, reps, A.name, hits4 / reps, 0.0, 1.0, 0.0)
        checks.append(Check(f"M4 p={prob:g}: P(A_n) = 1 exactly", hits4 == reps, f"{hits4}/{reps}"))

    marg = Table(["p", "r", "position", "empirical", "se", "exact_oracle", "z"])
    half = Table(["model", "p", "n", "reps", "p_hat", "exact"])
    H = half_mean_set()
    horizon = p["m5_horizon"]
    for i, prob in enumerate(p["m5_p_values"]):
        r = solve_m5_r(prob, horizon)
        exact = m5_marginals(prob, r, horizon)
        x5 = sample_binary(BinarySpec("M5", prob), horizon, substream(seed, 8, 3, i), size=reps)
        emp = x5.mean(axis=0)
        se = binomial_se(prob, reps)
        zs = (emp - prob) / se
        for j in range(horizon):
            marg.add(prob, r, j + 1, float(emp[j]), se, float(exact[j]), float(zs[j]))
        checks.append(Check(f"M5 p={prob:g}: oracle marginals equal p (1e-12)",
                            bool(np.all(np.abs(exact - prob) < 1e-12)), f"r = {r:.6g}"))
        checks.append(Check(f"M5 p={prob:g}: empirical marginals j<={horizon} within 3 SE",
                            bool(np.all(np.abs(zs) <= 3)), f"max |z| = {np.max(np.abs(zs)):.2f}"))
        if horizon % 2 == 0:
            q = min(prob, 1 - prob)
            half.add("M5", prob, horizon, reps, float(H.hits(x5).mean()),
                     r + (1 - r) * _binom_half(horizon, q / 2))
            half.add("M3", prob, horizon, reps, float("nan"), _binom_half(horizon, prob))
    return ExperimentResult({"binary_sets": t, "m5_marginals": marg, "half_mean": half}, {}, checks)


def _binom_half(n: int, q: float) -> float:
    from scipy.stats import binom
    return float(binom.pmf(n // 2, n, q))


def changepoint_calibration(p: dict, seed: int, threads: int) -> ExperimentResult:
    n, seqs, null_reps, level = p["length"], p["sequences"], p["null_reps"], p["nominal"]
    t = Table(["model", "p", "q", "m_cp", "sequences", "rejection_rate", "ci_lo", "ci_hi"])
    levels = Table(["p", "level", "frac_p_le_level", "se"])
    checks = []
    for i, prob in enumerate(p["null_p_values"]):
        x = sample_binary(BinarySpec("M3", prob), n, substream(seed, 9, 1, i), size=seqs)
        pv = changepoint_pvalues(x, null_reps, seed + 1 + i)
        hits = int(np.sum(pv <= level))
        ci = clopper_pearson(hits, seqs, 0.99)
        t.add("M3", prob, "", "", seqs, hits / seqs, ci.lower, ci.upper)
        checks.append(Check(f"type-I rate at {level:g} under M3 p={prob:g} in [0.03, 0.07]",
                            0.03 <= hits / seqs <= 0.07, f"{hits / seqs:.4f}"))
        dominated = True
        for a in p["uniformity_levels"]:
            frac = float(np.mean(pv <= a))
            se = binomial_se(a, seqs)
            levels.add(prob, a, frac, se)
            dominated &= frac <= a + 3 * se
        checks.append(Check(f"p-values under M3 p={prob:g} are not anti-conservative (3 SE)", dominated))

    worst = 1.0
    k = 0
    for prob in p["power_p_values"]:
        for q in p["power_q_values"]:
            if abs(q - prob) < p["min_gap"] - 1e-9:
                continue
            spec = BinarySpec("ChangePoint", prob, m_cp=p["m_cp"], q_fixed=q)
            x = sample_binary(spec, n, substream(seed, 9, 2, k), size=p["power_sequences"])
            pv = changepoint_pvalues(x, null_reps, seed + 1000 + k)
            hits = int(np.sum(pv <= level))
            ci = clopper_pearson(hits, p["power_sequences"], 0.99)
            rate = hits / p["power_sequences"]
            worst = min(worst, rate)
            t.add("ChangePoint", prob, q, p["m_cp"], p["power_sequences"], rate, ci.lower, ci.upper)
            k += 1
    checks.append(Check(f"power >= 0.8 at every grid point with |q-p| >= {p['min_gap']:g}",
                        worst >= 0.8, f"minimum power {worst:.3f}"))
    return ExperimentResult({"changepoint": t, "pvalue_levels": levels}, {}, checks)


def kmeans_consistency(p: dict, seed: int, threads: int) -> ExperimentResult:
    n_grid = p["n_grid"]
    reps = p["reps"]
    n_max = max(n_grid)
    level = p["ci_level"]
    checks = []

    base = base_sampler_from_dict(p["mixture_base"])
    mix = associated_mixture(base, p["k"], p["approx_budget"], substream(seed, 10, 1),
                             restarts=p["reference_restarts"])
    mix = mix.with_labels(mix.draw_labels(n_max, substream(seed, 10, 2)))
    tab = membership_consistency_experiment(mix, n_grid, reps, substream(seed, 10, 3),
                                            restarts=p["restarts"], level=level)
    f = tab.fractions
    se = np.sqrt(np.maximum(f * (1 - f), 1.0 / reps) / reps)
    monotone = all(f[i + 1] >= f[i] - 2 * np.hypot(se[i], se[i + 1]) for i in range(len(f) - 1))
    checks.append(Check(f"(a) mixture model: fraction correct >= 0.99 at n={n_max}",
                        f[-1] >= 0.99, f"{f[-1]:.4f}"))
    checks.append(Check("(a) mixture model: fractions non-decreasing along n (2 SE) and rising overall",
                        monotone and tab.rows[-1].ci.lower > tab.rows[0].ci.upper,
                        " ".join(f"{v:.4f}" for v in f)))

    delta, sigma = p["gauss_delta"], p["gauss_sigma"]
    labels = np.arange(n_max) % 2
    gauss = FixedClassSpec(np.array([[0.0], [delta]]), sigma**2, labels)
    gtab = membership_consistency_experiment(gauss, n_grid, reps, substream(seed, 10, 4),
                                             restarts=p["restarts"], level=level)
    target = 1 - misclassification_floor(delta, sigma)
    last = gtab.rows[-1]
    checks.append(Check(f"(b) Gaussian fixed-class: {level:.0%} CI at n={n_max} contains "
                        f"1 - Phi(-delta/2sigma) = {target:.4f}",
                        target in last.ci, f"[{last.ci.lower:.4f}, {last.ci.upper:.4f}]"))
    checks.append(Check("(b) Gaussian fixed-class: CI excludes 1", last.ci.upper < 1.0))

    toy = Table(["dataset", "n", "p", "k", "lloyd_objective", "brute_objective", "match"])
    rng = substream(seed, 10, 5)
    matches = 0
    for d in range(p["toy_datasets"]):
        n = int(rng.integers(p["toy_min_n"], p["toy_max_n"] + 1))
        dim = int(rng.integers(1, p["toy_max_p"] + 1))
        k = int(rng.integers(2, p["toy_max_k"] + 1))
        X = rng.standard_normal((n, dim)) * 2
        lo = lloyd(X, k, restarts=p["toy_restarts"], stream=rng).objective
        bf = brute_force_kmeans(X, k).objective
        ok = lo <= bf * (1 + 1e-9) + 1e-12
        matches += ok
        toy.add(d, n, dim, k, lo, bf, ok)
    checks.append(Check("(c) Lloyd matches brute force on >= 99 of 100 toy datasets",
                        matches >= p["toy_required"], f"{matches}/{p['toy_datasets']}"))

    result = ExperimentResult({"toy_oracle": toy}, {
        "pop_centers": mix.pop_centers.ravel().tolist(),
        "proportions": mix.proportions.tolist(),
        "tie_fraction": mix.tie_fraction,
        "gaussian_target": target,
    }, checks)
    result.csv_text["mixture_consistency"] = tab.to_csv()
    result.csv_text["gaussian_consistency"] = gtab.to_csv()
    return result


# ---------------------------------------------------------------------------

EXPERIMENTS = {
    "verify-lemma1": (verify_lemma1, {
        "n_values": [2, 5, 25, 200], "rho_values": [0.0, 0.3, 0.9], "sigma2": 1.0,
        "mu": 0.0, "xbar_values": [0.0, 1.7, -3.2],
    }),
    "mean-variance": (mean_variance, {
        "mu": 0.0, "sigma2": 1.0, "rho": 0.5, "n_values": [10, 10_000],
        "reps_per_n": [100_000, 20_000],
    }),
    "matched-pair": (matched_pair_experiment, {
        "rho1": 0.2, "sigma1_2": 1.0, "rho2": 0.6, "control_sigma2_2": 1.0, "n": 100,
        "reps": 10_000, "grid_lo": -10.0, "grid_hi": 10.0, "grid_step": 0.25, "curve_n": 50,
        "curve_reps": 4000, "invariant_threshold": 0.8,
    }),
    "rho-nonconsistency": (rho_nonconsistency, {
        "mu": 0.0, "sigma2": 1.0, "rho": 0.5, "n_values": [100, 10_000], "reps": 10_000,
        "replicate_length": 10, "replicate_counts": [100, 10_000], "replicate_reps": 1000,
    }),
    "mu-distinguish": (mu_distinguish, {
        "mu1": 0.0, "mu2": 1.0, "n": 20, "sigma2_values": [1.0], "rho_values": [0.0, 0.5, 0.9],
        "reps": 100_000, "ci_level": 0.99,
    }),
    "m2-components": (m2_components, {
        "mu": 0.0, "tau1_2": 1.0, "tau2_2": 1.0, "group_sizes": [5000, 5000],
        "n_multipliers": [1, 10], "reps": 2000,
    }),
    "binary-distinguish": (binary_distinguish, {
        "n": 10, "p_values": [0.5, 0.3], "reps": 100_000, "m5_p_values": [1 / 3, 0.25, 0.7],
        "m5_horizon": 12,
    }),
    "changepoint-calibration": (changepoint_calibration, {
        "length": 200, "sequences": 2000, "null_reps": 2000, "nominal": 0.05,
        "null_p_values": [0.5, 0.2], "uniformity_levels": [0.01, 0.05, 0.1, 0.25, 0.5],
        "m_cp": 100, "power_p_values": [0.2, 0.5, 0.8],
        "power_q_values": [0.0, 0.1, 0.2, 0.5, 0.8, 0.9, 1.0], "min_gap": 0.3,
        "power_sequences": 500,
    }),
    "kmeans-consistency": (kmeans_consistency, {
        "k": 2, "n_grid": [50, 200, 1000, 5000], "reps": 2000, "restarts": 8, "ci_level": 0.99,
        "mixture_base": {"kind": "gaussian_mixture", "means": [-1.5, 1.5], "sds": [1.0, 1.0],
                         "weights": [0.5, 0.5]},
        "approx_budget": 1_000_000, "reference_restarts": 4,
        "gauss_delta": 2.0, "gauss_sigma": 1.0,
        "toy_datasets": 100, "toy_min_n": 3, "toy_max_n": 10, "toy_max_p": 2, "toy_max_k": 3,
        "toy_restarts": 32, "toy_required": 99,
    }),
}

#: Documented CSV files and columns per experiment.
CSV_SCHEMAS = {
    "verify-lemma1": {"lemma1": ["n", "rho", "sigma2", "xbar", "max_dev_mean", "max_dev_cov", "mu_invariant", "max_row_sum"]},
    "mean-variance": {"mean_variance": ["n", "reps", "var_hat", "se", "exact", "z"]},
    "matched-pair": {"residual_ks": ["comparison", "rho1", "sigma1_2", "rho2", "sigma2_2", "n", "reps", "ks_statistic", "p_value", "rejects_0.001"],
                     "power_curve": ["mu", "diff", "diff_se"],
                     "integrals": ["set", "integral", "se", "z", "max_pointwise_z"]},
    "rho-nonconsistency": {"rho_hat": ["design", "size", "reps", "median", "q25", "q75", "iqr"]},
    "mu-distinguish": {"mu_distinguish": ["set", "n", "reps", "p1_hat", "p1_lo", "p1_hi", "p2_hat", "p2_lo", "p2_hi", "verdict"]},
    "m2-components": {"m2_components": ["group_sizes", "n", "reps", "tau2_2_mean", "tau2_2_sd", "tau2_2_first", "single_se", "grand_mean_sd", "expected_sd"]},
    "binary-distinguish": {"binary_sets": ["model", "p", "n", "reps", "set", "p_hat", "se", "exact", "z"],
                           "m5_marginals": ["p", "r", "position", "empirical", "se", "exact_oracle", "z"],
                           "half_mean": ["model", "p", "n", "reps", "p_hat", "exact"]},
    "changepoint-calibration": {"changepoint": ["model", "p", "q", "m_cp", "sequences", "rejection_rate", "ci_lo", "ci_hi"],
                                "pvalue_levels": ["p", "level", "frac_p_le_level", "se"]},
    "kmeans-consistency": {"mixture_consistency": ["n", "reps", "frac_correct", "ci_lo", "ci_hi"],
                           "gaussian_consistency": ["n", "reps", "frac_correct", "ci_lo", "ci_hi"],
                           "toy_oracle": ["dataset", "n", "p", "k", "lloyd_objective", "brute_objective", "match"]},
}


def run(experiment: str, params: dict | None = None, seed: int = 0, threads: int = 1) -> ExperimentResult:
    fn, defaults = EXPERIMENTS[experiment]
    merged = {**defaults, **(params or {})}
    start = time.perf_counter()
    result = fn(merged, seed, threads)
    result.summary["elapsed_seconds"] = time.perf_counter() - start
    return result
