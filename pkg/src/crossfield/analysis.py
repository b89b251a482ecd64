"""Distribution diagnostics for field score sets.

Descriptive statistics, a three-parameter generalized Pareto (GPD) fit by
maximum likelihood with a Kolmogorov-Smirnov check, complementary CDF series
for log-log plots, and median-absolute-deviation outlier detection.

The GPD is parameterized by shape ``k``, scale ``sigma`` and location ``mu``::

    F(x) = 1 - (1 + k (x - mu) / sigma) ** (-1 / k)

which is the same convention as ``scipy.stats.genpareto(c=k, loc=mu, scale=sigma)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy import optimize, stats

from .model import ScoreSet

KS_COEFFICIENT_5PCT = 1.358
MAD_THRESHOLD = 5.0
CCDF_OFFSET = 0.05
GPD_MIN_SAMPLE = 30
# Shape is kept in (-1, 1]: below -1 the density is unbounded at the upper
# endpoint, above 1 the mean is infinite and tied minima (nil scores) make the
# likelihood unbounded as sigma -> 0.
GPD_K_MIN, GPD_K_MAX = -1.0, 1.0
_K_SMALL = 1e-8


class InsufficientDataError(ValueError):
    pass


class FitError(RuntimeError):
    pass


class DegenerateMADError(ValueError):
    pass


def _values(scores) -> np.ndarray:
    if isinstance(scores, ScoreSet):
        scores = scores.scores
    return np.asarray(scores, dtype=float)


# -- order statistics ---------------------------------------------------------

def _median_sorted(x: np.ndarray) -> float:
    n = x.size
    mid = n // 2
    return float(x[mid]) if n % 2 else float((x[mid - 1] + x[mid]) / 2)


def hinges(scores) -> tuple[float, float]:
    """Tukey's lower and upper hinges: medians of the lower and upper halves.

    For odd sizes the overall median belongs to both halves.
    """
    x = np.sort(_values(scores))
    n = x.size
    if n < 2:
        raise InsufficientDataError("need at least 2 values for quartiles")
    half = (n + 1) // 2
    return _median_sorted(x[:half]), _median_sorted(x[n - half:])


@dataclass(frozen=True)
class DescriptiveStats:
    field_id: str
    n: int
    pct_zero: float
    mean: float
    coeff_variation: float
    median: float
    iqr: float
    skewness: float
    degenerate: bool = False


def descriptive_stats(scores, field_id: str | None = None) -> DescriptiveStats:
    """Table-style summary of a field distribution.

    Standard deviation uses the n-1 denominator and skewness is the adjusted
    Fisher-Pearson coefficient.  A zero-variance sample reports CV and
    skewness as 0 with ``degenerate`` set.
    """
    if field_id is None:
        field_id = scores.field_id if isinstance(scores, ScoreSet) else ""
    x = _values(scores)
    n = x.size
    if n < 2:
        raise InsufficientDataError(f"field {field_id}: need at least 2 values, got {n}")
    mean = float(x.mean())
    sd = float(x.std(ddof=1))
    lo, hi = hinges(x)
    degenerate = sd == 0 or mean == 0 or n < 3
    return DescriptiveStats(
        field_id=field_id,
        n=n,
        pct_zero=100.0 * np.count_nonzero(x == 0) / n,
        mean=mean,
        coeff_variation=0.0 if mean == 0 else 100.0 * sd / mean,
        median=_median_sorted(np.sort(x)),
        iqr=hi - lo,
        skewness=0.0 if sd == 0 or n < 3 else float(stats.skew(x, bias=False)),
        degenerate=degenerate,
    )


# -- generalized Pareto -------------------------------------------------------

@dataclass(frozen=True)
class GpdFit:
    k: float
    sigma: float
    mu: float
    log_likelihood: float
    n: int = 0


def gpd_loglik(x, k: float, sigma: float, mu: float) -> float:
    """Log-likelihood; -inf outside the parameter space or the support."""
    x = np.asarray(x, dtype=float)
    return _loglik(x, float(x.min()), float(x.max()), k, sigma, mu)


def _loglik(x: np.ndarray, lo: float, hi: float, k: float, sigma: float, mu: float) -> float:
    if not (GPD_K_MIN < k <= GPD_K_MAX and sigma > 0 and lo >= mu):
        return -math.inf
    if k < 0 and hi > mu - sigma / k:
        return -math.inf
    z = (x - mu) / sigma
    if abs(k) < _K_SMALL:
        core = z.sum()
    else:
        t = np.log1p(k * z)
        core = (1.0 + 1.0 / k) * t.sum()
    return float(-x.size * math.log(sigma) - core)


def gpd_cdf(x, k: float, sigma: float, mu: float) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    z = np.maximum((x - mu) / sigma, 0.0)
    if abs(k) < _K_SMALL:
        return -np.expm1(-z)
    arg = 1.0 + k * z
    with np.errstate(divide="ignore", invalid="ignore"):
        out = -np.expm1(-np.log(np.maximum(arg, 0.0)) / k)
    if k < 0:
        out = np.where(arg <= 0, 1.0, out)
    return out


def gpd_ppf(u, k: float, sigma: float, mu: float) -> np.ndarray:
    """Inverse CDF written in terms of the upper-tail probability ``u = 1 - F``."""
    u = np.asarray(u, dtype=float)
    if k == 0:
        return mu - sigma * np.log(u)
    return mu + (sigma / k) * (u ** (-k) - 1.0)


def gpd_start_grid(x) -> list[tuple[float, float, float]]:
    """Deterministic multi-start grid in (k, sigma, mu) order."""
    x = np.asarray(x, dtype=float)
    sd = float(x.std(ddof=1)) or 1.0
    eps = 1e-6 * (float(x.max() - x.min()) or 1.0)
    ks = np.round(np.arange(-0.4, 1.0 + 1e-9, 0.2), 10)
    mus = [float(x.min()) - eps, 0.0]
    return [(float(k), m * sd, mu) for k in ks for m in (0.5, 1.0, 2.0) for mu in mus]


def fit_gpd(scores, min_n: int = GPD_MIN_SAMPLE) -> GpdFit:
    """Maximum likelihood GPD fit over shape, scale and location.

    Nelder-Mead is started from every feasible point of `gpd_start_grid` and
    the best local optimum wins, earlier grid points winning ties.
    """
    x = _values(scores)
    if x.size < min_n:
        raise InsufficientDataError(f"GPD fit needs at least {min_n} values, got {x.size}")
    if not np.all(np.isfinite(x)):
        raise FitError("non-finite values in sample")

    lo, hi = float(x.min()), float(x.max())

    def nll(theta):
        k, log_sigma, mu = theta
        ll = _loglik(x, lo, hi, k, math.exp(log_sigma), mu)
        return -ll if math.isfinite(ll) else math.inf

    best: GpdFit | None = None
    for k0, s0, mu0 in gpd_start_grid(x):
        if not math.isfinite(gpd_loglik(x, k0, s0, mu0)):
            continue
        res = optimize.minimize(
            nll, np.array([k0, math.log(s0), mu0]), method="Nelder-Mead",
            options={"xatol": 1e-7, "fatol": 1e-9, "maxiter": 3000, "maxfev": 6000},
        )
        if not math.isfinite(res.fun):
            continue
        k, log_sigma, mu = (float(v) for v in res.x)
        if best is None or -res.fun > best.log_likelihood:
            best = GpdFit(k, math.exp(log_sigma), mu, float(-res.fun), int(x.size))
    if best is None:
        raise FitError("no feasible starting point for the GPD likelihood")
    return best


# -- Kolmogorov-Smirnov -------------------------------------------------------

@dataclass(frozen=True)
class KsResult:
    statistic: float
    critical_value_5pct: float
    n: int

    @property
    def reject(self) -> bool:
        return self.statistic > self.critical_value_5pct


def ks_critical_value(n: int, coefficient: float = KS_COEFFICIENT_5PCT) -> float:
    """Asymptotic 5% critical value c/sqrt(n), without estimated-parameter correction."""
    return coefficient / math.sqrt(n)


def ks_statistic(scores, cdf) -> float:
    x = np.sort(_values(scores))
    n = x.size
    f = np.asarray(cdf(x), dtype=float)
    i = np.arange(1, n + 1)
    return float(max(np.max(i / n - f), np.max(f - (i - 1) / n)))


def ks_test(scores, fit: GpdFit) -> KsResult:
    x = _values(scores)
    d = ks_statistic(x, lambda v: gpd_cdf(v, fit.k, fit.sigma, fit.mu))
    return KsResult(d, ks_critical_value(x.size), int(x.size))


# -- complementary CDF --------------------------------------------------------

def ccdf_series(scores, offset: float = CCDF_OFFSET) -> list[tuple[float, float]]:
    """Points (value + offset, P(X >= value)) over the distinct values, ascending.

    The offset keeps zero scores visible on a log axis.
    """
    x = np.sort(_values(scores))
    if not x.size:
        raise InsufficientDataError("empty score set")
    values, first = np.unique(x, return_index=True)
    y = (x.size - first) / x.size
    return [(float(v + offset), float(p)) for v, p in zip(values, y)]


# -- MAD outliers --------------------------------------------------------------

@dataclass
class MadResult:
    median: float
    mad: float
    ratios: np.ndarray
    flags: np.ndarray
    threshold: float
    incidence: dict[str, float] = field(default_factory=dict)  # percent per field
    counts: dict[str, tuple[int, int]] = field(default_factory=dict)  # field -> (outliers, size)

    @property
    def n_outliers(self) -> int:
        return int(self.flags.sum())


def mad_outliers(values, field_ids: Sequence[str] | None = None,
                 threshold: float = MAD_THRESHOLD) -> MadResult:
    """Flag values whose absolute deviation from the median exceeds `threshold` MADs.

    `values` should be the pooled positive scores; per-field incidence is the
    percentage of each field's entries that are flagged.
    """
    x = np.asarray(values, dtype=float)
    if not x.size:
        raise InsufficientDataError("no values for outlier detection")
    if np.any(x <= 0):
        raise ValueError("MAD outlier detection expects strictly positive (non-nil) scores")
    med = float(np.median(x))
    dev = np.abs(x - med)
    mad = float(np.median(dev))
    if not mad > 0:
        raise DegenerateMADError("MAD is zero: more than half of the values coincide")
    ratios = dev / mad
    flags = ratios > threshold
    result = MadResult(med, mad, ratios, flags, threshold)
    if field_ids is not None:
        labels = np.asarray(field_ids)
        if labels.shape != x.shape:
            raise ValueError("field_ids must align with values")
        for fid in dict.fromkeys(field_ids):
            mask = labels == fid
            hit, size = int(flags[mask].sum()), int(mask.sum())
            result.counts[fid] = (hit, size)
            result.incidence[fid] = 100.0 * hit / size
    return result


def outlier_incidence(score_sets: Iterable[ScoreSet], threshold: float = MAD_THRESHOLD) -> MadResult:
    """Pool the non-nil scores of all fields and run MAD detection on them."""
    values, labels = [], []
    for s in score_sets:
        for v in s.scores:
            if v > 0:
                values.append(v)
                labels.append(s.field_id)
    return mad_outliers(values, labels, threshold)


def incidence_range(result: MadResult) -> float:
    """Spread (max - min, percentage points) of per-field outlier incidence."""
    vals = list(result.incidence.values())
    return max(vals) - min(vals) if vals else 0.0
