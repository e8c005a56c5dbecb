"""Command line experiment runner.

Each experiment produces rows ``name,d,n,k,M,replicas,seed,stat,value,stderr``
and optional acceptance checks.  The report body depends only on the
configuration; timing lives in the manifest written next to it.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import sys
import time
from dataclasses import asdict, dataclass, field, replace
from datetime import datetime, timezone
from importlib import resources
from pathlib import Path

import numpy as np

from . import __version__, analytic, mcstats
from .contour import gen_contour, reconstruct_tree, tree_distances
from .mcstats.runner import WORKERS_ENV
from .streams import replica_seed

SCHEMA_VERSION = "1.0"
EXPERIMENTS = ("oracles", "contour", "variance", "clt", "covariance", "truncation",
               "badpoints", "fourth-moment")
CSV_COLUMNS = ("name", "d", "n", "k", "M", "replicas", "seed", "stat", "value", "stderr")

EXIT_OK, EXIT_ERROR, EXIT_CHECK = 0, 1, 2

# Per-experiment defaults for flags left unset.
DEFAULTS = {
    "oracles": dict(dim=1, n_grid=(14,), k=None, replicas=1),
    "contour": dict(dim=1, n_grid=(200,), k=None, replicas=1000),
    "variance": dict(dim=17, n_grid=(1024, 4096, 16384), k=16, replicas=1000),
    "clt": dict(dim=17, n_grid=(1024, 4096, 16384), k=16, replicas=1000),
    "fourth-moment": dict(dim=17, n_grid=(1024, 2048, 4096, 8192, 16384), k=16, replicas=1000),
    "covariance": dict(dim=9, n_grid=(4096,), k=4, replicas=10000),
    "truncation": dict(dim=9, n_grid=(0,), k=64, replicas=10000),
    "badpoints": dict(dim=5, n_grid=(1000,), k=None, replicas=1000),
}
COVARIANCE_LAGS = (0, 4, 8, 16, 32, 64, 128, 256)
TRUNCATION_KS = (2, 4, 8, 16)
HITTING_DIM = 5
HITTING_JS = (4, 8, 16, 32, 64, 128, 256)


class UsageError(Exception):
    pass


@dataclass(frozen=True)
class RunConfig:
    experiment: str
    dim: int | None = None
    n_grid: tuple | None = None
    k: int | None = None
    past: int | str = "auto"
    replicas: int | None = None
    seed: int = 20260801
    out: str | None = None
    format: str = "csv"
    check: bool = False
    workers: int | None = None

    def resolved(self, name: str) -> "RunConfig":
        """Copy for experiment ``name`` with unset fields filled from defaults."""
        base = DEFAULTS[name]
        return replace(
            self, experiment=name,
            dim=self.dim if self.dim is not None else base["dim"],
            n_grid=self.n_grid if self.n_grid is not None else base["n_grid"],
            k=self.k if self.k is not None else base["k"],
            replicas=self.replicas if self.replicas is not None else base["replicas"],
        )

    @property
    def echo(self) -> dict:
        return {"d": self.dim, "n_grid": list(self.n_grid), "k": self.k, "M": self.past,
                "replicas": self.replicas, "seed": self.seed}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: error: {message}")


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be at least 1: {text!r}")
    return value


def _nonneg_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if value < 0:
        raise argparse.ArgumentTypeError(f"must be non-negative: {text!r}")
    return value


def _grid(text: str) -> tuple:
    try:
        values = tuple(int(t) for t in text.split(",") if t.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma list of integers: {text!r}") from None
    if not values or any(v < 0 for v in values) or any(b <= a for a, b in zip(values, values[1:])):
        raise argparse.ArgumentTypeError("grid must be increasing non-negative integers")
    return values


def _past(text: str):
    if text == "auto":
        return text
    return _nonneg_int(text)


def build_parser() -> argparse.ArgumentParser:
    defaults = "\n".join(
        f"  {name:<14} d={v['dim']} n={','.join(map(str, v['n_grid']))} k={v['k']} "
        f"replicas={v['replicas']}" for name, v in DEFAULTS.items())
    p = _Parser(
        prog="brwrange",
        description="Monte Carlo checks for the range of a tree-indexed random walk.",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog=f"per-experiment defaults for unset flags:\n{defaults}\n\n"
               f"worker count defaults to ${WORKERS_ENV} (else 1).\n"
               "exit codes: 0 success, 1 error, 2 a --check threshold failed.")
    p.add_argument("--experiment", required=True, choices=EXPERIMENTS + ("all",))
    p.add_argument("--dim", type=_positive_int, help="lattice dimension d")
    p.add_argument("--n", type=_nonneg_int, help="single walk length")
    p.add_argument("--n-grid", type=_grid, help="comma list of walk lengths")
    p.add_argument("--k", type=_nonneg_int, help="truncation radius")
    p.add_argument("--past", type=_past, default="auto",
                   help='backward window M, or "auto" for the certified window (default)')
    p.add_argument("--replicas", type=_positive_int)
    p.add_argument("--seed", type=_nonneg_int, default=20260801, help="default 20260801")
    p.add_argument("--out", help="report path (default: stdout, no manifest)")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--check", action="store_true", help="exit 2 if an acceptance threshold fails")
    p.add_argument("--workers", type=_positive_int)
    return p


def parse_args(argv=None) -> RunConfig:
    ns = build_parser().parse_args(argv)
    if ns.n is not None and ns.n_grid is not None:
        raise UsageError("brwrange: error: give --n or --n-grid, not both")
    grid = (ns.n,) if ns.n is not None else ns.n_grid
    return RunConfig(experiment=ns.experiment, dim=ns.dim, n_grid=grid, k=ns.k, past=ns.past,
                     replicas=ns.replicas, seed=ns.seed, out=ns.out, format=ns.format,
                     check=ns.check, workers=ns.workers)


# ------------------------------------------------------------------ results

@dataclass
class ExperimentResult:
    config: RunConfig
    rows: list = field(default_factory=list)
    summaries: list = field(default_factory=list)
    checks: list = field(default_factory=list)

    def add(self, stat, value, stderr=None, n=None, k="config"):
        c = self.config
        self.rows.append({
            "name": c.experiment, "d": c.dim, "n": None if n is None else int(n),
            "k": c.k if k == "config" else (None if k is None else int(k)),
            "M": c.past, "replicas": c.replicas, "seed": c.seed, "stat": stat,
            "value": _num(value), "stderr": _num(stderr)})

    def check(self, name, passed, detail):
        self.checks.append({"check": name, "passed": bool(passed), "detail": detail})

    def summary(self, n, summary):
        self.summaries.append({"n": int(n), **{k: _num(v) for k, v in summary.as_dict().items()}})

    @property
    def passed(self) -> bool:
        return all(c["passed"] for c in self.checks)

    def as_dict(self) -> dict:
        return {"name": self.config.experiment, "config": self.config.echo, "rows": self.rows,
                "summaries": self.summaries, "checks": self.checks}


def _num(x):
    if x is None:
        return None
    if isinstance(x, (bool, np.bool_)):
        return int(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    x = float(x)
    if math.isfinite(x):
        return x
    return "nan" if math.isnan(x) else ("inf" if x > 0 else "-inf")


def _past_arg(config: RunConfig):
    return None if config.past == "auto" else int(config.past)


# -------------------------------------------------------------- experiments

def run_oracles(config: RunConfig) -> ExperimentResult:
    res = ExperimentResult(config)
    n_max = min(max(config.n_grid), analytic.MAX_ENUMERATION)
    worst = 0.0
    for n in range(1, n_max + 1):
        brute = analytic.brute_force_excursion_pmf(n)
        for m in range(0, n + 1):
            worst = max(worst, abs(brute[m] - analytic.excursion_pmf(n, m)))
    res.add("excursion_pmf_max_abs_diff", worst, n=n_max, k=None)
    res.check("excursion_pmf", worst <= 1e-12, f"max abs diff {worst:.3e} over n <= {n_max}")

    gw_worst = 0.0
    offspring = 0.5 ** (np.arange(64) + 1)
    law = np.zeros(64)
    law[1] = 1.0
    for level in range(1, 5):
        # Z_level from Z_{level-1}: sum of Z_{level-1} i.i.d. offspring counts
        new = np.zeros(64)
        power = np.zeros(64)
        power[0] = 1.0
        for z in range(64):
            if law[z]:
                new += law[z] * power
            power = np.convolve(power, offspring)[:64]
        law = new
        gw = analytic.gw_generation_pmf(level, 32)
        gw_worst = max(gw_worst, float(np.max(np.abs(gw.probs - law[:33]))))
    res.add("gw_pmf_max_abs_diff", gw_worst, n=4, k=None)
    res.check("gw_pmf", gw_worst <= 1e-10, f"max abs diff {gw_worst:.3e} for levels <= 4")

    rng = np.random.default_rng(config.seed)
    semi = 0.0
    for s in rng.random(100):
        for level in range(0, 8):
            lhs = analytic.gw_generating_function(level + 1, s)
            rhs = analytic.gw_generating_function(1, analytic.gw_generating_function(level, s))
            semi = max(semi, abs(lhs - rhs))
    res.add("gw_semigroup_max_abs_diff", semi, k=None)
    res.check("gw_semigroup", semi <= 1e-12, f"max abs diff {semi:.3e} at 100 points")

    phi = abs(analytic.normal_cdf(1.959964) - 0.975)
    res.add("normal_cdf_abs_err_1.959964", phi, k=None)
    res.check("normal_cdf", phi <= 1e-6, f"|Phi(1.959964) - 0.975| = {phi:.2e}")
    return res


def run_contour(config: RunConfig) -> ExperimentResult:
    res = ExperimentResult(config)
    hits = np.array([gen_contour(0, 2, replica_seed(config.seed, i)).values[-1] == 0
                     for i in range(config.replicas)], dtype=float)
    p, se = hits.mean(), math.sqrt(0.25 / hits.size)
    res.add("p_c2_zero", p, se, n=2, k=None)
    res.check("p_c2_zero", abs(p - 0.5) <= 4 * se, f"P(C_2=0) = {p:.4f} +- {se:.4f}")

    length = int(max(config.n_grid))
    mismatches = 0
    windows = min(config.replicas, 1000)
    for r in range(windows):
        seed = replica_seed(config.seed + 1, r)
        back = length // 2
        path = gen_contour(back, length - back, seed)
        tree = reconstruct_tree(path)
        rng = np.random.default_rng(seed)
        src = rng.integers(-back, length - back + 1)
        v = tree.vertex(int(src))
        bfs = tree.bfs_distances(v)
        others = np.arange(-back, length - back + 1)
        formula = tree_distances(path, np.full(others.size, src), others)
        truth = np.array([bfs[int(tree.vertex_of[path.pos(int(j))])] for j in others])
        mismatches += int(np.count_nonzero(formula != truth))
    res.add("distance_formula_mismatches", mismatches, n=length, k=None)
    res.check("distance_formula", mismatches == 0, f"{mismatches} mismatches in {windows} windows")
    return res


def _xi_samples(config: RunConfig) -> np.ndarray:
    return mcstats.xi_sum_samples(config.dim, config.n_grid, config.k, config.replicas,
                                  config.seed, workers=config.workers, past=_past_arg(config))


def run_variance(config: RunConfig, samples=None) -> ExperimentResult:
    res = ExperimentResult(config)
    samples = _xi_samples(config) if samples is None else samples
    curve = mcstats.variance_curve(samples, config.n_grid)
    for j, (n, est) in enumerate(zip(curve.n_grid, curve.var_over_n)):
        res.summary(n, mcstats.summarize(samples[:, j]))
        res.add("var_over_n", est.value, est.stderr, n=n)
    lo, hi = curve.kappa_hat.ci()
    res.add("kappa_hat", curve.kappa_hat.value, curve.kappa_hat.stderr, n=curve.n_grid[-1])
    res.add("kappa_ci99_low", lo, n=curve.n_grid[-1])
    res.add("kappa_ci99_high", hi, n=curve.n_grid[-1])
    res.add("plateau_ratio", curve.plateau_ratio)
    res.check("plateau_ratio", curve.plateau_ratio <= 1.15,
              f"max consecutive ratio {curve.plateau_ratio:.4f} (<= 1.15)")
    res.check("kappa_positive", lo > 0, f"99% CI [{lo:.4g}, {hi:.4g}] excludes 0")
    return res


def run_clt(config: RunConfig, samples=None) -> ExperimentResult:
    res = ExperimentResult(config)
    samples = _xi_samples(config) if samples is None else samples
    diags = mcstats.clt_curve(samples, config.n_grid)
    for j, (n, dg) in enumerate(zip(config.n_grid, diags)):
        s = mcstats.summarize(samples[:, j])
        res.summary(n, s)
        res.add("skewness", dg.skewness, s.se_skewness, n=n)
        res.add("excess_kurtosis", dg.excess_kurtosis, s.se_excess_kurtosis, n=n)
        res.add("skewness_z", dg.skewness_z, n=n)
        res.add("kurtosis_z", dg.kurtosis_z, n=n)
        res.add("ks_distance", dg.ks_distance, n=n)
        res.add("ks_pvalue", dg.ks_pvalue, n=n)
        res.add("ad_statistic", dg.ad_statistic, n=n)
    last = diags[-1]
    res.check("skewness", abs(last.skewness) < 0.15, f"|skewness| = {abs(last.skewness):.4f} (< 0.15)")
    res.check("excess_kurtosis", abs(last.excess_kurtosis) < 0.3,
              f"|excess kurtosis| = {abs(last.excess_kurtosis):.4f} (< 0.3)")
    res.check("ks_distance", last.ks_distance < 0.03, f"KS distance {last.ks_distance:.4f} (< 0.03)")
    return res


def run_fourth_moment(config: RunConfig, samples=None) -> ExperimentResult:
    res = ExperimentResult(config)
    samples = _xi_samples(config) if samples is None else samples
    curve = mcstats.fourth_moment_from_samples(samples, config.n_grid)
    for n, m4, ratio in zip(curve.n_grid, curve.fourth, curve.ratio):
        res.add("centered_fourth_moment", m4.value, m4.stderr, n=n)
        res.add("fourth_over_n2", ratio.value, ratio.stderr, n=n)
    if curve.fit is not None:
        res.add("fourth_moment_slope", curve.fit.slope, curve.fit.se_slope)
        res.add("fourth_moment_slope_max_abs_residual", float(np.max(np.abs(curve.fit.residuals))))
        res.check("fourth_moment_slope", curve.fit.slope <= 2.2,
                  f"slope {curve.fit.slope:.4f} (<= 2.2)")
    else:
        res.check("fourth_moment_slope", False, "no fit: need two grid points with positive moments")
    return res


def run_covariance(config: RunConfig) -> ExperimentResult:
    res = ExperimentResult(config)
    window = int(max(config.n_grid))
    curve = mcstats.covariance_curve(config.dim, config.k, COVARIANCE_LAGS, config.replicas,
                                     config.seed, window=window, workers=config.workers,
                                     past=_past_arg(config))
    for lag, c, se, ps, pse in zip(curve.lags, curve.cov, curve.stderr, curve.partial_sums,
                                   curve.partial_stderr):
        res.add("cov", c, se, n=lag)
        res.add("partial_sum_abs_cov", ps, pse, n=lag)
    res.add("mean_xi", curve.mean_xi.value, curve.mean_xi.stderr)
    res.add("var_xi", curve.variance.value, curve.variance.stderr)
    res.check("var_xi_bound", 0 <= curve.cov[0] <= 0.25, f"Var(xi) = {curve.cov[0]:.4f}")
    if curve.fit is not None:
        res.add("cov_slope", curve.fit.slope, curve.fit.se_slope)
        res.check("cov_slope", curve.fit.slope <= -1.2,
                  f"slope {curve.fit.slope:.4f} over lags {curve.fit_lags.tolist()} (<= -1.2)")
    else:
        res.check("cov_slope", False, "fewer than two significant lags")
    change = curve.partial_change(128, 256)
    res.add("partial_sum_change_128_256", change.value, change.stderr)
    res.check("partial_sum_stable", change.value < 2 * change.stderr,
              f"change {change.value:.3g} vs 2 SE = {2 * change.stderr:.3g}")
    return res


def run_truncation(config: RunConfig) -> ExperimentResult:
    res = ExperimentResult(config)
    k_max = config.k
    ks = tuple(k for k in TRUNCATION_KS if k < k_max)
    curve = mcstats.truncation_bias_curve(config.dim, ks, k_max, config.replicas, config.seed,
                                          workers=config.workers)
    for k, est in zip(curve.ks, curve.bias):
        res.add("bias_vs_kmax", est.value, est.stderr, n=0, k=k)
    bound = -(config.dim - 4) / 2 + 0.5
    if curve.fit is not None:
        res.add("bias_slope", curve.fit.slope, curve.fit.se_slope)
        res.check("bias_slope", curve.fit.slope <= bound,
                  f"slope {curve.fit.slope:.4f} (<= {bound})")
    else:
        res.check("bias_slope", False, "a bias estimate was zero")

    hit_cfg = replace(config, dim=HITTING_DIM)
    hit = ExperimentResult(hit_cfg)
    curve = mcstats.hitting_curve(HITTING_DIM, HITTING_JS, config.replicas, config.seed + 1,
                                  workers=config.workers)
    for j, est in zip(curve.js, curve.prob):
        hit.add("hit_prob", est.value, est.stderr, n=j, k=None)
    bound = -(HITTING_DIM - 2) / 2 + 0.3
    if curve.fit is not None:
        hit.add("hit_slope", curve.fit.slope, curve.fit.se_slope, k=None)
        res.check("hit_slope", curve.fit.slope <= bound, f"slope {curve.fit.slope:.4f} (<= {bound})")
    else:
        res.check("hit_slope", False, "a hitting probability estimate was zero")
    res.rows.extend(hit.rows)
    return res


def run_badpoints(config: RunConfig) -> ExperimentResult:
    res = ExperimentResult(config)
    n = int(max(config.n_grid))
    past = n if config.past == "auto" else int(config.past)
    b = mcstats.bad_gap_battery(config.dim, n, config.replicas, config.seed, past=past,
                                workers=config.workers)
    rate = mcstats.bad_rate(config.dim, max(n // 2, 1), config.replicas, config.seed + 1,
                            workers=config.workers)
    q = b.q
    res.add("bad_rate", rate.rate.value, rate.rate.stderr, n=n, k=None)
    res.add("bad_rate_spine", rate.rate_spine.value, rate.rate_spine.stderr, n=n, k=None)
    res.add("bad_rate_off_spine", rate.rate_off_spine.value, rate.rate_off_spine.stderr, n=n, k=None)
    res.add("gap_chisquare", b.chisquare.statistic, n=n, k=None)
    res.add("gap_chisquare_dof", b.chisquare.dof, n=n, k=None)
    res.add("gap_chisquare_pvalue", b.chisquare.pvalue, n=n, k=None)
    res.add("mean_gap", b.mean_gap.value, b.mean_gap.stderr, n=n, k=None)
    res.add("corr_N_Yhat", b.corr.value, b.corr.stderr, n=n, k=None)
    if b.median_test is not None:
        res.add("median_split_pvalue", b.median_test.pvalue, n=n, k=None)
    res.add("mean_bad_per_step", b.mean_bad_per_step.value, b.mean_bad_per_step.stderr, n=n, k=None)
    res.add("var_bad_per_step", b.var_bad_per_step.value, b.var_bad_per_step.stderr, n=n, k=None)
    for key, value in b.reference.items():
        res.add(f"reference_{key}", value, n=n, k=None)
    res.add("pathwise_violations", b.violations, n=n, k=None)
    res.check("bad_rate", abs(rate.rate.value - q) <= 4 * rate.rate.stderr,
              f"rate {rate.rate.value:.5f} vs 1/(8d) = {q:.5f}")
    res.check("gap_law", b.chisquare.pvalue > 1e-3, f"chi-square p = {b.chisquare.pvalue:.4g}")
    res.check("mean_gap", abs(b.mean_gap.value - b.expected_mean_gap) <= 4 * b.mean_gap.stderr,
              f"E[X_0] = {b.mean_gap.value:.5f} vs {b.expected_mean_gap:.5f}")
    res.check("corr_N_Yhat", abs(b.corr.value) <= 4 * b.corr.stderr,
              f"corr {b.corr.value:.4f} +- {b.corr.stderr:.4f}")
    res.check("pathwise_identity", b.violations == 0, f"{b.violations} violations")
    return res


RUNNERS = {
    "oracles": run_oracles,
    "contour": run_contour,
    "variance": run_variance,
    "clt": run_clt,
    "fourth-moment": run_fourth_moment,
    "covariance": run_covariance,
    "truncation": run_truncation,
    "badpoints": run_badpoints,
}


def run_experiments(config: RunConfig) -> list[ExperimentResult]:
    names = EXPERIMENTS if config.experiment == "all" else (config.experiment,)
    results = []
    shared = {}
    for name in names:
        cfg = config.resolved(name)
        if name in ("variance", "clt", "fourth-moment"):
            key = (cfg.dim, cfg.n_grid, cfg.k, cfg.past, cfg.replicas, cfg.seed)
            if key not in shared:
                shared[key] = _xi_samples(cfg)
            results.append(RUNNERS[name](cfg, shared[key]))
        else:
            results.append(RUNNERS[name](cfg))
    return results


# ----------------------------------------------------------------- output

def render_csv(results) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for res in results:
        for row in res.rows:
            writer.writerow(_cell(row[c]) for c in CSV_COLUMNS)
        for chk in res.checks:
            c = res.config
            writer.writerow(_cell(v) for v in (c.experiment, c.dim, None, c.k, c.past, c.replicas,
                                               c.seed, f"check_{chk['check']}",
                                               int(chk["passed"]), None))
    return buf.getvalue()


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def report_document(results) -> dict:
    return {"schema_version": SCHEMA_VERSION, "experiments": [r.as_dict() for r in results]}


def render_json(results) -> str:
    return json.dumps(report_document(results), indent=2, sort_keys=True, allow_nan=False) + "\n"


def load_schema() -> dict:
    return json.loads(resources.files("brwrange").joinpath("report_schema.json").read_text())


def validate_report(document: dict) -> None:
    """Raise ``jsonschema.ValidationError`` if ``document`` breaks the schema."""
    import jsonschema

    jsonschema.validate(document, load_schema())


def git_blob_hash(data: bytes) -> str:
    return hashlib.sha1(b"blob %d\0" % len(data) + data).hexdigest()


def manifest(config: RunConfig, body: str, started: float, elapsed: float) -> dict:
    cfg = asdict(config)
    cfg["n_grid"] = None if config.n_grid is None else list(config.n_grid)
    canonical = json.dumps(cfg, sort_keys=True).encode()
    return {
        "schema_version": SCHEMA_VERSION,
        "package_version": __version__,
        "config": cfg,
        "seed": config.seed,
        "input_hash": git_blob_hash(canonical),
        "report_hash": git_blob_hash(body.encode()),
        "started_utc": datetime.fromtimestamp(started, timezone.utc).isoformat(),
        "wall_clock_seconds": elapsed,
    }


def run(config: RunConfig) -> int:
    started = time.time()
    t0 = time.perf_counter()
    results = run_experiments(config)
    body = render_json(results) if config.format == "json" else render_csv(results)
    if config.format == "json":
        validate_report(json.loads(body))
    elapsed = time.perf_counter() - t0
    if config.out:
        out = Path(config.out)
        out.write_text(body)
        man = manifest(config, body, started, elapsed)
        Path(str(out) + ".manifest.json").write_text(json.dumps(man, indent=2, sort_keys=True) + "\n")
    else:
        sys.stdout.write(body)
    if config.check and not all(r.passed for r in results):
        for r in results:
            for c in r.checks:
                if not c["passed"]:
                    print(f"check failed: {r.config.experiment}/{c['check']}: {c['detail']}",
                          file=sys.stderr)
        return EXIT_CHECK
    return EXIT_OK


def main(argv=None) -> int:
    try:
        config = parse_args(argv)
    except UsageError as exc:
        build_parser().print_usage(sys.stderr)
        print(exc, file=sys.stderr)
        return EXIT_ERROR
    try:
        return run(config)
    except Exception as exc:
        print(f"brwrange: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    raise SystemExit(main())
