"""Survey statistics for the two trust questionnaires.

Respondents fill a 4-item scale (CHF1-4, 7-point) and a 15-item scale
(XAI1-15, 5-point); covariates record age, years of experience, an
AI-experience flag and whether the respondent's own diagnosis agreed
with the model. This module computes the full reporting battery over
those data: Cronbach's alpha per scale, composite descriptives with
small-sample-corrected skewness/kurtosis (G1, excess G2 — the usual
social-science package convention), Pearson correlation with its t-based
p-value, simple linear regression in standardized form, and independent
two-sample t-tests (pooled by default, Welch by flag), including a
summary-statistics mode for published group summaries.

Everything is pure; p-values come from tdist.t_distribution_sf.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .tdist import t_distribution_sf

CHF_ITEMS = tuple(f"CHF{i}" for i in range(1, 5))
XAI_ITEMS = tuple(f"XAI{i}" for i in range(1, 16))
CSV_HEADER = ("respondent", "age", "experience_years", "ai_experience",
              "prediction_correct", *CHF_ITEMS, *XAI_ITEMS)
SCALE_BOUNDS = {"CHF": (1.0, 7.0), "XAI": (1.0, 5.0)}


@dataclass
class SurveyMatrix:
    respondent: list[str]
    age: np.ndarray
    experience_years: np.ndarray
    ai_experience: np.ndarray        # bool
    prediction_correct: np.ndarray   # bool
    chf: np.ndarray                  # (n, 4)
    xai: np.ndarray                  # (n, 15)

    @property
    def n(self) -> int:
        return len(self.respondent)

    def composite(self, scale: str) -> np.ndarray:
        """Per-respondent mean over the scale's items."""
        return self.items(scale).mean(axis=1)

    def items(self, scale: str) -> np.ndarray:
        if scale == "CHF":
            return self.chf
        if scale == "XAI":
            return self.xai
        raise ValueError(f"unknown scale {scale!r}")


def load_survey_csv(path, reverse_items: tuple[str, ...] = ()) -> SurveyMatrix:
    """Read the survey CSV (fixed header, no missing cells allowed).

    ``reverse_items`` names negatively keyed items to re-code as
    (lo + hi) - x before any statistics; by default nothing is reversed.
    """
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ValueError(f"empty survey file: {path}")
    header = tuple(h.strip() for h in rows[0])
    if header != CSV_HEADER:
        raise ValueError(
            f"bad survey header in {path}: expected "
            f"{','.join(CSV_HEADER)!r}, got {','.join(header)!r}")
    body = [r for r in rows[1:] if any(cell.strip() for cell in r)]
    if len(body) < 2:
        raise ValueError(f"survey {path} needs at least 2 respondents")
    table = []
    names = []
    for lineno, row in enumerate(body, start=2):
        if len(row) != len(CSV_HEADER):
            raise ValueError(
                f"{path}:{lineno}: expected {len(CSV_HEADER)} cells, "
                f"got {len(row)}")
        names.append(row[0].strip())
        vals = []
        for col, cell in zip(CSV_HEADER[1:], row[1:]):
            cell = cell.strip()
            if not cell:
                raise ValueError(f"{path}:{lineno}: missing value in {col!r}")
            try:
                vals.append(float(cell))
            except ValueError:
                raise ValueError(
                    f"{path}:{lineno}: non-numeric value {cell!r} in {col!r}"
                ) from None
        table.append(vals)
    arr = np.asarray(table, dtype=np.float64)
    chf = arr[:, 4:8]
    xai = arr[:, 8:23]
    for scale, block, item_names in (("CHF", chf, CHF_ITEMS),
                                     ("XAI", xai, XAI_ITEMS)):
        lo, hi = SCALE_BOUNDS[scale]
        if block.min() < lo or block.max() > hi:
            bad = np.argwhere((block < lo) | (block > hi))[0]
            raise ValueError(
                f"{path}: {item_names[bad[1]]} score {block[tuple(bad)]} "
                f"outside scale bounds [{lo:g}, {hi:g}]")
        for item in reverse_items:
            if item in item_names:
                j = item_names.index(item)
                block[:, j] = (lo + hi) - block[:, j]
    unknown = set(reverse_items) - set(CHF_ITEMS) - set(XAI_ITEMS)
    if unknown:
        raise ValueError(f"unknown reverse-coded items: {sorted(unknown)}")
    return SurveyMatrix(
        respondent=names,
        age=arr[:, 0],
        experience_years=arr[:, 1],
        ai_experience=arr[:, 2] != 0,
        prediction_correct=arr[:, 3] != 0,
        chf=chf,
        xai=xai,
    )


# ------------------------------------------------------------ reports

@dataclass(frozen=True)
class DescriptiveReport:
    n: int
    mean: float
    sd: float
    skewness: float
    kurtosis: float | None    # excess; None below n = 4


@dataclass(frozen=True)
class CorrelationReport:
    r: float
    p: float
    n: int
    t: float


@dataclass(frozen=True)
class RegressionReport:
    beta_std: float       # standardized coefficient (= r for one predictor)
    se_beta_std: float
    r2: float
    adj_r2: float
    f: float
    p: float
    n: int


@dataclass(frozen=True)
class TTestReport:
    mean_a: float
    sd_a: float
    n_a: int
    mean_b: float
    sd_b: float
    n_b: int
    t: float
    df: float
    p: float
    variant: str


# --------------------------------------------------------- operations

def cronbach_alpha(items) -> float:
    """alpha = k/(k-1) * (1 - sum(item variances) / variance(row sums)).

    ``items`` is an (n respondents, k items) matrix; sample variances
    (n-1 denominator) throughout.
    """
    m = np.asarray(items, dtype=np.float64)
    if m.ndim != 2:
        raise ValueError(f"need an (n, k) matrix, got shape {m.shape}")
    n, k = m.shape
    if n < 2 or k < 2:
        raise ValueError(f"need >= 2 respondents and >= 2 items, got {m.shape}")
    total_var = m.sum(axis=1).var(ddof=1)
    if total_var == 0:
        raise ValueError("zero variance of the summed scale")
    return k / (k - 1) * (1.0 - m.var(axis=0, ddof=1).sum() / total_var)


def descriptives(scores) -> DescriptiveReport:
    """Mean, sample sd, and small-sample-corrected shape moments.

    Skewness is the adjusted Fisher-Pearson G1; kurtosis is excess G2
    (normal -> 0), reported as None when n < 4 leaves it undefined.
    """
    x = np.asarray(scores, dtype=np.float64).ravel()
    n = len(x)
    if n < 3:
        raise ValueError(f"need n >= 3 for shape moments, got {n}")
    mean = x.mean()
    d = x - mean
    m2 = float((d ** 2).mean())
    if m2 == 0:
        raise ValueError("zero variance: shape moments undefined")
    sd = float(x.std(ddof=1))
    g1 = float((d ** 3).mean()) / m2 ** 1.5
    G1 = math.sqrt(n * (n - 1)) / (n - 2) * g1
    if n < 4:
        G2 = None
    else:
        g2 = float((d ** 4).mean()) / m2 ** 2 - 3.0
        G2 = (n - 1) / ((n - 2) * (n - 3)) * ((n + 1) * g2 + 6.0)
    return DescriptiveReport(n=n, mean=float(mean), sd=sd, skewness=G1,
                             kurtosis=G2)


def pearson(x, y) -> CorrelationReport:
    """Sample correlation with the exact t-based two-sided p-value."""
    xa = np.asarray(x, dtype=np.float64).ravel()
    ya = np.asarray(y, dtype=np.float64).ravel()
    if xa.shape != ya.shape:
        raise ValueError(f"length mismatch: {xa.shape} vs {ya.shape}")
    n = len(xa)
    if n < 3:
        raise ValueError(f"need n >= 3, got {n}")
    dx, dy = xa - xa.mean(), ya - ya.mean()
    sxx, syy = float(dx @ dx), float(dy @ dy)
    if sxx == 0 or syy == 0:
        raise ValueError("constant input: correlation undefined")
    r = float(dx @ dy) / math.sqrt(sxx * syy)
    r = max(-1.0, min(1.0, r))
    if abs(r) == 1.0:
        t, p = math.copysign(math.inf, r), 0.0
    else:
        t = r * math.sqrt(n - 2) / math.sqrt(1.0 - r * r)
        p = t_distribution_sf(t, n - 2)
    return CorrelationReport(r=r, p=p, n=n, t=t)


def ols_simple(x, y) -> RegressionReport:
    """Least-squares fit y = a + b x, reported in standardized form.

    Runs the actual regression (slope from normal equations, R^2 from
    residuals) rather than shortcutting through r, so the textbook
    identities beta_std = r, F = t^2, R^2 = r^2 stay *checkable* facts
    about this code instead of tautologies.
    """
    xa = np.asarray(x, dtype=np.float64).ravel()
    ya = np.asarray(y, dtype=np.float64).ravel()
    if xa.shape != ya.shape:
        raise ValueError(f"length mismatch: {xa.shape} vs {ya.shape}")
    n = len(xa)
    if n < 3:
        raise ValueError(f"need n >= 3, got {n}")
    dx = xa - xa.mean()
    sxx = float(dx @ dx)
    if sxx == 0:
        raise ValueError("degenerate predictor: zero variance")
    b = float(dx @ (ya - ya.mean())) / sxx
    resid = ya - (ya.mean() + b * dx)
    sse = float(resid @ resid)
    dyy = ya - ya.mean()
    sst = float(dyy @ dyy)
    if sst == 0:
        raise ValueError("constant response: R^2 undefined")
    r2 = 1.0 - sse / sst
    r2 = max(0.0, min(1.0, r2))
    adj_r2 = 1.0 - (1.0 - r2) * (n - 1) / (n - 2)
    sx = math.sqrt(sxx / (n - 1))
    sy = math.sqrt(sst / (n - 1))
    beta_std = b * sx / sy
    se_beta_std = math.sqrt((1.0 - r2) / (n - 2))
    if r2 == 1.0:
        f, p = math.inf, 0.0
    else:
        f = (n - 2) * r2 / (1.0 - r2)
        p = t_distribution_sf(math.sqrt(f), n - 2)
    return RegressionReport(beta_std=beta_std, se_beta_std=se_beta_std,
                            r2=r2, adj_r2=adj_r2, f=f, p=p, n=n)


def ttest_independent(a, b, variant: str = "pooled") -> TTestReport:
    """Two-sample t-test from raw group vectors."""
    aa = np.asarray(a, dtype=np.float64).ravel()
    ba = np.asarray(b, dtype=np.float64).ravel()
    if len(aa) < 2 or len(ba) < 2:
        raise ValueError("each group needs n >= 2")
    return ttest_from_summary(
        float(aa.mean()), float(aa.std(ddof=1)), len(aa),
        float(ba.mean()), float(ba.std(ddof=1)), len(ba),
        variant=variant)


def ttest_from_summary(mean_a: float, sd_a: float, n_a: int,
                       mean_b: float, sd_b: float, n_b: int,
                       variant: str = "pooled") -> TTestReport:
    """Two-sample t-test from published summary statistics.

    ``pooled`` is the classic equal-variance Student test; ``welch``
    drops that assumption (Satterthwaite df, possibly fractional).
    """
    if variant not in ("pooled", "welch"):
        raise ValueError(f"variant must be 'pooled' or 'welch', got {variant!r}")
    if n_a < 2 or n_b < 2:
        raise ValueError("each group needs n >= 2")
    if sd_a < 0 or sd_b < 0:
        raise ValueError("negative standard deviation")
    if sd_a == 0 and sd_b == 0:
        raise ValueError("zero variance in both groups: t undefined")
    va, vb = sd_a ** 2, sd_b ** 2
    if variant == "pooled":
        df = n_a + n_b - 2
        sp2 = ((n_a - 1) * va + (n_b - 1) * vb) / df
        se = math.sqrt(sp2 * (1.0 / n_a + 1.0 / n_b))
    else:
        df = (va / n_a + vb / n_b) ** 2 / (
            (va / n_a) ** 2 / (n_a - 1) + (vb / n_b) ** 2 / (n_b - 1))
        se = math.sqrt(va / n_a + vb / n_b)
    t = (mean_a - mean_b) / se
    return TTestReport(mean_a=mean_a, sd_a=sd_a, n_a=n_a,
                       mean_b=mean_b, sd_b=sd_b, n_b=n_b,
                       t=t, df=df, p=t_distribution_sf(t, df),
                       variant=variant)


# ---------------------------------------------------------- rendering

def stats_report_text(survey: SurveyMatrix, variant: str = "pooled") -> str:
    """The full battery as one aligned plain-text report.

    Sections: per-scale reliability and composite descriptives, the
    between-scale correlation, the CHF -> XAI simple regression, and
    group-difference t-tests split by the AI-experience covariate.
    """
    chf = survey.composite("CHF")
    xai = survey.composite("XAI")
    lines = [f"Respondents: n = {survey.n}", ""]

    lines.append("Scale reliability and descriptives")
    hdr = f"{'Scale':<6} {'alpha':>7} {'mean':>7} {'sd':>7} {'skew':>7} {'kurt':>7}"
    lines += [hdr, "-" * len(hdr)]
    for scale, comp in (("CHF", chf), ("XAI", xai)):
        alpha = cronbach_alpha(survey.items(scale))
        d = descriptives(comp)
        kurt = f"{d.kurtosis:7.3f}" if d.kurtosis is not None else "    n/a"
        lines.append(f"{scale:<6} {alpha:7.3f} {d.mean:7.3f} {d.sd:7.3f} "
                     f"{d.skewness:7.3f} {kurt}")
    lines.append("")

    c = pearson(chf, xai)
    lines.append("Correlation (CHF composite vs XAI composite)")
    lines.append(f"  r = {c.r:.3f}   t = {c.t:.3f}   two-sided p = {c.p:.3f}"
                 f"   n = {c.n}")
    lines.append("")

    reg = ols_simple(chf, xai)
    lines.append("Simple regression (XAI composite on CHF composite)")
    lines.append(f"  beta(std) = {reg.beta_std:.3f}   SE = {reg.se_beta_std:.3f}"
                 f"   R^2 = {reg.r2:.3f}   adj R^2 = {reg.adj_r2:.3f}")
    lines.append(f"  F(1, {reg.n - 2}) = {reg.f:.3f}   p = {reg.p:.3f}")
    lines.append("")

    lines.append(f"Group differences by AI experience ({variant} t-test)")
    ghdr = (f"{'Scale':<6} {'grp':>4} {'n':>3} {'mean':>7} {'sd':>7} "
            f"{'t':>8} {'df':>7} {'p':>7}")
    lines += [ghdr, "-" * len(ghdr)]
    has = survey.ai_experience
    for scale, comp in (("CHF", chf), ("XAI", xai)):
        a, b = comp[~has], comp[has]
        if len(a) < 2 or len(b) < 2:
            lines.append(f"{scale:<6}  covariate split too small for a t-test")
            continue
        tt = ttest_independent(a, b, variant=variant)
        lines.append(f"{scale:<6} {'no':>4} {tt.n_a:>3} {tt.mean_a:7.3f} "
                     f"{tt.sd_a:7.3f} {tt.t:8.3f} {tt.df:7.2f} {tt.p:7.3f}")
        lines.append(f"{scale:<6} {'yes':>4} {tt.n_b:>3} {tt.mean_b:7.3f} "
                     f"{tt.sd_b:7.3f}")
    return "\n".join(lines) + "\n"
