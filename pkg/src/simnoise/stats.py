"""Hypothesis tests: unpaired t-test, balanced two-way ANOVA, Pearson correlation.

Tail probabilities come from the regularized incomplete beta function,
evaluated here by a modified-Lentz continued fraction.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .exceptions import DegenerateStatisticWarning, ParameterError

DEFAULT_ALPHA = 0.05

_CF_TOL = 1e-15
_CF_MAX_ITER = 10000
_TINY = 1e-300


def _betacf(a, b, x):
    # modified Lentz evaluation of the incomplete beta continued fraction
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _TINY:
        d = _TINY
    d = 1.0 / d
    h = d
    for m in range(1, _CF_MAX_ITER + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _TINY:
            d = _TINY
        c = 1.0 + aa / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _TINY:
            d = _TINY
        c = 1.0 + aa / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _CF_TOL:
            return h
    raise ArithmeticError(f"incomplete beta continued fraction did not converge (a={a}, b={b}, x={x})")


def betainc(a, b, x):
    """Regularized incomplete beta function I_x(a, b)."""
    if a <= 0 or b <= 0:
        raise ParameterError(f"betainc needs a, b > 0, got a={a}, b={b}")
    if not 0.0 <= x <= 1.0:
        raise ParameterError(f"betainc needs 0 <= x <= 1, got {x}")
    if x == 0.0 or x == 1.0:
        return float(x)
    log_front = (
        math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b) + a * math.log(x) + b * math.log1p(-x)
    )
    front = math.exp(log_front)
    # the fraction converges fastest below the mean of the beta density
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


@dataclass(frozen=True)
class StudentT:
    df: float

    def __post_init__(self):
        if not (self.df > 0 and math.isfinite(self.df)):
            raise ParameterError(f"t distribution needs df > 0, got {self.df}")

    def sf(self, t):
        """P(T > t)."""
        if math.isnan(t):
            raise ParameterError("statistic is NaN")
        if math.isinf(t):
            return 0.0 if t > 0 else 1.0
        half = 0.5 * betainc(self.df / 2.0, 0.5, self.df / (self.df + t * t))
        return half if t >= 0 else 1.0 - half


@dataclass(frozen=True)
class FisherF:
    df1: float
    df2: float

    def __post_init__(self):
        for name in ("df1", "df2"):
            v = getattr(self, name)
            if not (v > 0 and math.isfinite(v)):
                raise ParameterError(f"F distribution needs {name} > 0, got {v}")

    def sf(self, f):
        """P(F > f)."""
        if math.isnan(f):
            raise ParameterError("statistic is NaN")
        if f <= 0:
            return 1.0
        if math.isinf(f):
            return 0.0
        return betainc(self.df2 / 2.0, self.df1 / 2.0, self.df2 / (self.df2 + self.df1 * f))


def tail_probability(statistic, distribution, sidedness="two"):
    """Tail probability of ``statistic`` under ``distribution``.

    For the t distribution, ``"one"`` is the upper tail P(T > t) and ``"two"``
    is P(|T| > |t|). The F distribution only has an upper tail.
    """
    statistic = float(statistic)
    if sidedness not in ("one", "two"):
        raise ParameterError(f"sidedness must be 'one' or 'two', got {sidedness!r}")
    if isinstance(distribution, StudentT):
        if sidedness == "one":
            return distribution.sf(statistic)
        return min(1.0, 2.0 * distribution.sf(abs(statistic)))
    if isinstance(distribution, FisherF):
        if sidedness == "two":
            raise ParameterError("the F test is one-sided; use sidedness='one'")
        return distribution.sf(statistic)
    raise ParameterError(f"unsupported distribution {distribution!r}")


@dataclass(frozen=True)
class TTestResult:
    t_statistic: float
    degrees_of_freedom: float
    p_value: float
    two_sided: bool = True
    variant: str = "pooled"
    degenerate: bool = False

    def significant(self, alpha=DEFAULT_ALPHA):
        return self.p_value < alpha


def _zero_spread(var, scale):
    return bool(var <= (64 * np.finfo(float).eps * max(scale, _TINY)) ** 2)


def t_test_unpaired(group_a, group_b, variant="pooled"):
    """Two-sided unpaired two-sample t-test.

    ``pooled`` is the equal-variance Student test with ``n_a + n_b - 2``
    degrees of freedom; ``welch`` uses the Welch-Satterthwaite df.
    """
    a = np.asarray(group_a, dtype=float)
    b = np.asarray(group_b, dtype=float)
    if a.ndim != 1 or b.ndim != 1 or a.size < 2 or b.size < 2:
        raise ParameterError("each group needs at least 2 values")
    if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
        raise ParameterError("groups contain non-finite values")
    if variant not in ("pooled", "welch"):
        raise ParameterError(f"variant must be 'pooled' or 'welch', got {variant!r}")

    na, nb = a.size, b.size
    va, vb = a.var(ddof=1), b.var(ddof=1)
    diff = a.mean() - b.mean()
    if variant == "pooled":
        df = float(na + nb - 2)
        sp2 = ((na - 1) * va + (nb - 1) * vb) / df
        se2 = sp2 * (1.0 / na + 1.0 / nb)
    else:
        sa, sb = va / na, vb / nb
        se2 = sa + sb
        if se2 > 0:
            df = se2**2 / (sa**2 / (na - 1) + sb**2 / (nb - 1))
        else:
            df = float(na + nb - 2)

    scale = max(np.abs(a).max(), np.abs(b).max())
    if _zero_spread(se2, scale):
        if _zero_spread(diff * diff, scale):
            return TTestResult(0.0, df, 1.0, True, variant, degenerate=True)
        warnings.warn("zero within-group variance with unequal means", DegenerateStatisticWarning, stacklevel=2)
        return TTestResult(math.copysign(math.inf, diff), df, 0.0, True, variant, degenerate=True)

    t = float(diff / math.sqrt(se2))
    p = tail_probability(t, StudentT(df), "two")
    return TTestResult(t, df, p, True, variant)


@dataclass
class FactorialTable:
    """Observations of a two-factor design, keyed by ``(level_a, level_b)``.

    Level order is the order of first appearance unless given explicitly.
    """

    cells: dict
    factor_a: str = "A"
    factor_b: str = "B"
    levels_a: list = field(default=None)
    levels_b: list = field(default=None)

    def __post_init__(self):
        self.cells = {k: np.asarray(v, dtype=float).ravel() for k, v in self.cells.items()}
        if self.levels_a is None:
            self.levels_a = list(dict.fromkeys(k[0] for k in self.cells))
        if self.levels_b is None:
            self.levels_b = list(dict.fromkeys(k[1] for k in self.cells))
        if not self.cells:
            raise ParameterError("factorial table is empty")
        for la in self.levels_a:
            for lb in self.levels_b:
                cell = self.cells.get((la, lb))
                if cell is None or cell.size == 0:
                    raise ParameterError(f"cell ({la!r}, {lb!r}) is empty")
                if not np.all(np.isfinite(cell)):
                    raise ParameterError(f"cell ({la!r}, {lb!r}) has non-finite values")

    @classmethod
    def from_array(cls, Y, levels_a, levels_b, factor_a="A", factor_b="B"):
        """Build from an array of shape (len(levels_a), len(levels_b), n_replicates)."""
        Y = np.asarray(Y, dtype=float)
        if Y.ndim == 2:
            Y = Y[..., np.newaxis]
        cells = {(la, lb): Y[i, j] for i, la in enumerate(levels_a) for j, lb in enumerate(levels_b)}
        return cls(cells, factor_a, factor_b, list(levels_a), list(levels_b))

    def is_balanced(self):
        sizes = {c.size for c in self.cells.values()}
        return len(sizes) == 1

    def as_array(self):
        if not self.is_balanced():
            raise ParameterError("unbalanced factorial table: all cells need the same number of observations")
        return np.stack(
            [np.stack([self.cells[(la, lb)] for lb in self.levels_b]) for la in self.levels_a]
        )


@dataclass(frozen=True)
class AnovaRow:
    effect: str
    sum_of_squares: float
    df: int
    mean_square: float
    F: float | None = None
    p_value: float | None = None


@dataclass(frozen=True)
class AnovaResult:
    rows: tuple
    total_ss: float
    degenerate: bool = False
    interaction_pooled: bool = False

    def __getitem__(self, effect):
        for row in self.rows:
            if row.effect == effect:
                return row
        raise KeyError(effect)

    @property
    def effects(self):
        return [r.effect for r in self.rows]


def anova_two_way(table):
    """Fixed-effects two-way ANOVA on a balanced table.

    Rows are factor A, factor B, their interaction and the residual. With a
    single observation per cell the interaction is the residual and no
    separate interaction row is reported.
    """
    Y = table.as_array()
    I, J, r = Y.shape
    grand = Y.mean()
    cell = Y.mean(axis=2)
    ma = cell.mean(axis=1)
    mb = cell.mean(axis=0)

    ss_a = J * r * float(np.sum((ma - grand) ** 2))
    ss_b = I * r * float(np.sum((mb - grand) ** 2))
    inter = cell - ma[:, None] - mb[None, :] + grand
    ss_ab = r * float(np.sum(inter**2))
    ss_res = float(np.sum((Y - cell[..., None]) ** 2))
    ss_tot = float(np.sum((Y - grand) ** 2))

    df_a, df_b, df_ab = I - 1, J - 1, (I - 1) * (J - 1)
    pooled = r == 1
    if pooled:
        ss_res, df_res = ss_ab, df_ab
        effects = [(table.factor_a, ss_a, df_a), (table.factor_b, ss_b, df_b)]
    else:
        df_res = I * J * (r - 1)
        effects = [
            (table.factor_a, ss_a, df_a),
            (table.factor_b, ss_b, df_b),
            (f"{table.factor_a}:{table.factor_b}", ss_ab, df_ab),
        ]

    scale = float(np.abs(Y).max())
    degenerate = df_res < 1 or _zero_spread(ss_res / max(Y.size, 1), scale)
    ms_res = ss_res / df_res if df_res > 0 else math.nan

    rows = []
    for name, ss, df in effects:
        ms = ss / df if df > 0 else math.nan
        if df < 1:
            F = p = None
        elif degenerate:
            # an effect is undefined against a zero (or absent) residual
            F, p = (math.inf, 0.0) if df_res >= 1 and not _zero_spread(ss / Y.size, scale) else (math.nan, math.nan)
        else:
            F = ms / ms_res
            p = tail_probability(F, FisherF(df, df_res), "one")
        rows.append(AnovaRow(name, ss, df, ms, F, p))
    rows.append(AnovaRow("residual", ss_res, df_res, ms_res))
    if degenerate:
        warnings.warn("ANOVA residual variance is zero; F is undefined", DegenerateStatisticWarning, stacklevel=2)
    return AnovaResult(tuple(rows), ss_tot, degenerate, pooled)


def pearson_r(x, y):
    """Sample Pearson correlation; NaN (with a warning) when either input is constant."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.ndim != 1 or x.shape != y.shape:
        raise ParameterError("x and y must be 1-D and of equal length")
    if x.size < 3:
        raise ParameterError(f"correlation needs at least 3 points, got {x.size}")
    dx = x - x.mean()
    dy = y - y.mean()
    sxx = float(dx @ dx)
    syy = float(dy @ dy)
    if _zero_spread(sxx / x.size, float(np.abs(x).max())) or _zero_spread(syy / y.size, float(np.abs(y).max())):
        warnings.warn("correlation undefined for a constant input", DegenerateStatisticWarning, stacklevel=2)
        return math.nan
    r = float(dx @ dy) / math.sqrt(sxx * syy)
    return max(-1.0, min(1.0, r))
