"""Descriptive statistics, robust-SE OLS, VIF, ANOVA, and Bartlett's test.

The regression path factors the design matrix once (QR) and derives
coefficients, classical and heteroskedasticity-consistent standard
errors, and R-squared from it; normal equations are never formed here.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations
from typing import Mapping, Sequence

import numpy as np
from scipy import stats as spstats
from scipy.linalg import solve_triangular

from ._validation import as_float_matrix, as_float_vector


class CollinearityError(ValueError):
    """Design matrix is rank deficient; carries the offending column name."""

    def __init__(self, column: str, message: str | None = None):
        self.column = column
        super().__init__(message or f"column {column!r} is linearly dependent on the others")


@dataclass(frozen=True)
class DataMatrix:
    """A named, fully observed numeric table (no missing cells)."""

    names: tuple[str, ...]
    values: np.ndarray

    def __post_init__(self):
        values = as_float_matrix(self.values, "values")
        object.__setattr__(self, "values", values)
        if len(self.names) != values.shape[1]:
            raise ValueError(
                f"{len(self.names)} names for {values.shape[1]} columns"
            )

    @classmethod
    def from_columns(cls, columns: Mapping[str, Sequence[float]]) -> "DataMatrix":
        names = tuple(columns)
        return cls(names=names, values=np.column_stack([columns[n] for n in names]))

    @property
    def n(self) -> int:
        return self.values.shape[0]

    def column(self, name: str) -> np.ndarray:
        return self.values[:, self.names.index(name)]


@dataclass(frozen=True)
class ColumnSummary:
    name: str
    n: int
    mean: float
    sd: float
    min: float
    max: float


@dataclass(frozen=True)
class DescribeResult:
    columns: tuple[ColumnSummary, ...]
    correlation: np.ndarray  # entries involving zero-variance columns are nan markers


@dataclass(frozen=True)
class RegressionResult:
    """OLS fit mirroring a policy-table regression column."""

    names: tuple[str, ...]            # intercept first
    coef: np.ndarray
    se_classical: np.ndarray
    se_robust: np.ndarray
    t_stats: np.ndarray               # on robust SEs
    p_values: np.ndarray              # two-sided, t distribution, n-k-1 df
    r_squared: float
    n: int
    k: int
    residuals: np.ndarray
    robust_flavor: str
    vif: tuple[float, ...] = ()
    vif_names: tuple[str, ...] = ()
    mean_vif: float = float("nan")


@dataclass(frozen=True)
class PairwiseComparison:
    group_a: str
    group_b: str
    mean_diff: float
    raw_p: float
    bonferroni_p: float


@dataclass(frozen=True)
class AnovaResult:
    f_stat: float
    df_between: int
    df_within: int
    p_value: float
    group_stats: tuple[tuple[str, int, float], ...]  # (name, n, mean)
    pairwise: tuple[PairwiseComparison, ...] = field(default_factory=tuple)


def describe(matrix: DataMatrix) -> DescribeResult:
    """Per-column n/mean/sd/min/max plus the Pearson correlation matrix.

    sd uses the n-1 denominator. Correlation entries involving a
    zero-variance column are set to nan individually; other entries are
    unaffected.
    """
    values = matrix.values
    n, k = values.shape
    if n < 2:
        raise ValueError("describe needs at least 2 rows")
    means = values.mean(axis=0)
    sds = values.std(axis=0, ddof=1)
    columns = tuple(
        ColumnSummary(
            name=matrix.names[j],
            n=n,
            mean=float(means[j]),
            sd=float(sds[j]),
            min=float(values[:, j].min()),
            max=float(values[:, j].max()),
        )
        for j in range(k)
    )
    centered = values - means
    corr = np.full((k, k), np.nan)
    for i in range(k):
        for j in range(i, k):
            if sds[i] == 0.0 or sds[j] == 0.0:
                continue
            cov = float(centered[:, i] @ centered[:, j]) / (n - 1)
            corr[i, j] = corr[j, i] = cov / (sds[i] * sds[j])
        if sds[i] != 0.0:
            corr[i, i] = 1.0
    return DescribeResult(columns=columns, correlation=corr)


def _design(X: np.ndarray) -> np.ndarray:
    return np.column_stack([np.ones(X.shape[0]), X])


def _qr_or_raise(design: np.ndarray, names: Sequence[str]) -> tuple[np.ndarray, np.ndarray]:
    """Reduced QR; raises CollinearityError naming a dependent column."""
    q, r = np.linalg.qr(design)
    diag = np.abs(np.diag(r))
    tol = design.shape[0] * np.finfo(float).eps * (diag.max() if diag.size else 0.0)
    bad = np.nonzero(diag <= tol)[0]
    if bad.size:
        raise CollinearityError(str(names[bad[0]]))
    return q, r


def ols(
    y,
    X,
    names: Sequence[str] | None = None,
    robust_flavor: str = "HC1",
    with_vif: bool = True,
) -> RegressionResult:
    """OLS with classical and heteroskedasticity-robust standard errors.

    The robust covariance is the sandwich (X'X)^-1 X' diag(e_i^2) X (X'X)^-1,
    scaled by n/(n-k-1) for HC1 (unscaled for HC0). t statistics and
    two-sided p-values use the robust SEs with n-k-1 degrees of freedom.
    """
    if isinstance(X, DataMatrix):
        if names is None:
            names = X.names
        X = X.values
    X = as_float_matrix(X)
    y = as_float_vector(y)
    if robust_flavor not in ("HC0", "HC1"):
        raise ValueError(f"robust_flavor must be HC0 or HC1, got {robust_flavor!r}")
    n, k = X.shape
    if y.shape[0] != n:
        raise ValueError(f"y has {y.shape[0]} rows, X has {n}")
    if n <= k + 1:
        raise ValueError(f"need n > k+1 observations, got n={n}, k={k}")
    if names is None:
        names = [f"x{j + 1}" for j in range(k)]
    design_names = ["intercept", *names]

    design = _design(X)
    q, r = _qr_or_raise(design, design_names)
    beta = solve_triangular(r, q.T @ y)
    fitted = design @ beta
    resid = y - fitted
    df = n - k - 1

    rinv = solve_triangular(r, np.eye(k + 1))
    xtx_inv = rinv @ rinv.T

    ssr = float(resid @ resid)
    sigma2 = ssr / df
    se_classical = np.sqrt(np.diag(sigma2 * xtx_inv))

    meat = (design * resid[:, None] ** 2).T @ design
    cov_robust = xtx_inv @ meat @ xtx_inv
    if robust_flavor == "HC1":
        cov_robust = cov_robust * (n / df)
    se_robust = np.sqrt(np.diag(cov_robust))

    with np.errstate(divide="ignore", invalid="ignore"):
        t_stats = np.where(se_robust > 0, beta / se_robust, 0.0)
    p_values = 2.0 * spstats.t.sf(np.abs(t_stats), df)

    sst = float(((y - y.mean()) ** 2).sum())
    r_squared = 1.0 - ssr / sst if sst > 0 else 0.0

    vifs: tuple[float, ...] = ()
    mean_vif = float("nan")
    if with_vif and k >= 2:
        vifs = tuple(vif(X, names))
        mean_vif = float(np.mean(vifs))

    return RegressionResult(
        names=tuple(design_names),
        coef=beta,
        se_classical=se_classical,
        se_robust=se_robust,
        t_stats=t_stats,
        p_values=p_values,
        r_squared=float(r_squared),
        n=n,
        k=k,
        residuals=resid,
        robust_flavor=robust_flavor,
        vif=vifs,
        vif_names=tuple(names) if vifs else (),
        mean_vif=mean_vif,
    )


def r_squared_of(y: np.ndarray, X: np.ndarray, names: Sequence[str]) -> float:
    """R-squared of y on X plus intercept, via the QR path."""
    design = _design(X)
    q, r = _qr_or_raise(design, ["intercept", *names])
    beta = solve_triangular(r, q.T @ y)
    resid = y - design @ beta
    sst = float(((y - y.mean()) ** 2).sum())
    if sst == 0:
        return 0.0
    return 1.0 - float(resid @ resid) / sst


def vif(X, names: Sequence[str] | None = None) -> list[float]:
    """Variance inflation factors, 1/(1 - R2_j) per predictor column."""
    if isinstance(X, DataMatrix):
        if names is None:
            names = X.names
        X = X.values
    X = as_float_matrix(X)
    n, k = X.shape
    if k < 2:
        raise ValueError("vif needs at least 2 columns")
    if names is None:
        names = [f"x{j + 1}" for j in range(k)]
    out = []
    for j in range(k):
        others = np.delete(X, j, axis=1)
        other_names = [names[i] for i in range(k) if i != j]
        r2 = r_squared_of(X[:, j], others, other_names)
        if 1.0 - r2 <= 1e-12:
            raise CollinearityError(
                str(names[j]), f"column {names[j]!r} is perfectly collinear (R2={r2})"
            )
        out.append(1.0 / (1.0 - r2))
    return out


def _group_arrays(groups: Mapping[str, Sequence[float]]) -> dict[str, np.ndarray]:
    return {str(name): as_float_vector(vals, str(name)) for name, vals in groups.items()}


def oneway_anova(groups: Mapping[str, Sequence[float]]) -> AnovaResult:
    """One-way ANOVA with Bonferroni-adjusted pairwise t comparisons.

    Pairwise follow-ups are pooled-variance two-sample t tests; each raw
    p is multiplied by the number of pairs (capped at 1). A zero
    within-group sum of squares reports F as inf with p = 0.
    """
    data = _group_arrays(groups)
    if len(data) < 2:
        raise ValueError("need at least 2 groups")
    total_n = sum(arr.size for arr in data.values())
    if total_n <= len(data):
        raise ValueError("need total n greater than the number of groups")

    grand_mean = float(np.concatenate(list(data.values())).mean())
    df_between = len(data) - 1
    df_within = total_n - len(data)
    ssb = sum(arr.size * (arr.mean() - grand_mean) ** 2 for arr in data.values())
    ssw = sum(float(((arr - arr.mean()) ** 2).sum()) for arr in data.values())
    if ssw == 0.0:
        f_stat, p_value = math.inf, 0.0
    else:
        f_stat = (ssb / df_between) / (ssw / df_within)
        p_value = float(spstats.f.sf(f_stat, df_between, df_within))

    names = sorted(data)
    m = len(names) * (len(names) - 1) // 2
    pairwise = []
    for a, b in combinations(names, 2):
        xa, xb = data[a], data[b]
        diff = float(xa.mean() - xb.mean())
        df_pair = xa.size + xb.size - 2
        if df_pair <= 0:
            raise ValueError(f"pair ({a}, {b}) has no degrees of freedom")
        sp2 = (
            float(((xa - xa.mean()) ** 2).sum()) + float(((xb - xb.mean()) ** 2).sum())
        ) / df_pair
        if sp2 == 0.0:
            raw_p = 0.0 if diff != 0.0 else 1.0
        else:
            t = diff / math.sqrt(sp2 * (1.0 / xa.size + 1.0 / xb.size))
            raw_p = float(2.0 * spstats.t.sf(abs(t), df_pair))
        pairwise.append(
            PairwiseComparison(a, b, diff, raw_p, min(1.0, m * raw_p))
        )

    return AnovaResult(
        f_stat=float(f_stat),
        df_between=df_between,
        df_within=df_within,
        p_value=p_value,
        group_stats=tuple((name, data[name].size, float(data[name].mean())) for name in names),
        pairwise=tuple(pairwise),
    )


def bartlett(groups: Mapping[str, Sequence[float]]) -> tuple[float, int, float]:
    """Bartlett's homogeneity-of-variances test: (statistic, df, p)."""
    data = _group_arrays(groups)
    if len(data) < 2:
        raise ValueError("need at least 2 groups")
    k = len(data)
    sizes = np.array([arr.size for arr in data.values()], dtype=float)
    if np.any(sizes < 2):
        raise ValueError("every group needs at least 2 observations")
    variances = np.array([arr.var(ddof=1) for arr in data.values()])
    if np.any(variances == 0.0):
        raise ValueError("a group has zero variance; Bartlett statistic undefined")
    n_total = float(sizes.sum())
    sp2 = float(((sizes - 1) * variances).sum() / (n_total - k))
    statistic = (n_total - k) * math.log(sp2) - float(((sizes - 1) * np.log(variances)).sum())
    correction = 1.0 + (float((1.0 / (sizes - 1)).sum()) - 1.0 / (n_total - k)) / (3.0 * (k - 1))
    statistic /= correction
    df = k - 1
    p_value = float(spstats.chi2.sf(statistic, df))
    return statistic, df, p_value
