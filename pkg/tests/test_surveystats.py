"""Likert-scale statistics: reliability, moments, r/ols/t, CSV loading."""

import math

import numpy as np
import pytest
from scipy import integrate

from histoxai.surveystats import (CHF_ITEMS, CSV_HEADER, XAI_ITEMS,
                                  cronbach_alpha, descriptives,
                                  load_survey_csv, ols_simple, pearson,
                                  stats_report_text, ttest_from_summary,
                                  ttest_independent)
from histoxai.tdist import betainc_reg, t_distribution_sf


def vectors_with_correlation(r, n, seed=0):
    """Construct (x, y) whose sample Pearson correlation is exactly r.

    Center a random x and an orthogonalized noise vector, normalize
    both, and mix: y = r*x_hat + sqrt(1-r^2)*e_hat.
    """
    rng = np.random.default_rng(seed)
    x = rng.normal(size=n)
    e = rng.normal(size=n)
    xc = x - x.mean()
    ec = e - e.mean()
    ec -= (ec @ xc) / (xc @ xc) * xc
    xh = xc / np.sqrt(xc @ xc)
    eh = ec / np.sqrt(ec @ ec)
    y = r * xh + math.sqrt(1.0 - r * r) * eh
    return x, y


# -------------------------------------------------------- t distribution

def t_pdf(x, df):
    return (math.exp(math.lgamma((df + 1) / 2) - math.lgamma(df / 2))
            / math.sqrt(df * math.pi) * (1 + x * x / df) ** (-(df + 1) / 2))


def test_t_sf_at_zero_is_one():
    for df in (1, 2, 7.5, 60):
        assert t_distribution_sf(0.0, df) == 1.0


def test_t_sf_cauchy_closed_form():
    # df = 1 is Cauchy: two-sided p = 2*(1/2 - arctan(t)/pi)
    for t in (0.3, 1.0, math.sqrt(3.0), 5.0):
        expect = 2.0 * (0.5 - math.atan(t) / math.pi)
        assert t_distribution_sf(t, 1) == pytest.approx(expect, abs=1e-12)
    assert t_distribution_sf(1.0, 1) == pytest.approx(0.5, abs=1e-12)


def test_t_sf_matches_quadrature_oracle():
    # independent route: numerically integrate the density's tail
    for t, df in ((0.5, 2), (1.23, 5), (2.77, 9), (3.1877, 8),
                  (1.5, 2.5), (4.2, 29)):
        tail, err = integrate.quad(t_pdf, abs(t), np.inf, args=(df,),
                                   epsabs=1e-13, epsrel=1e-13)
        assert err < 1e-11
        assert abs(t_distribution_sf(t, df) - 2.0 * tail) < 1e-10, (t, df)


def test_t_sf_symmetric_and_monotone():
    for df in (1, 4, 17):
        ps = [t_distribution_sf(t, df) for t in np.arange(0.0, 6.1, 0.5)]
        assert all(a > b for a, b in zip(ps, ps[1:]))
        assert t_distribution_sf(-2.2, df) == t_distribution_sf(2.2, df)
    assert t_distribution_sf(math.inf, 5) == 0.0


def test_t_sf_validates():
    with pytest.raises(ValueError, match="df"):
        t_distribution_sf(1.0, 0.5)
    with pytest.raises(ValueError, match="NaN"):
        t_distribution_sf(math.nan, 5)


def test_betainc_reg_bounds_and_symmetry():
    assert betainc_reg(2.0, 3.0, 0.0) == 0.0
    assert betainc_reg(2.0, 3.0, 1.0) == 1.0
    # I_x(1,1) is the identity
    assert betainc_reg(1.0, 1.0, 0.37) == pytest.approx(0.37, abs=1e-14)
    a, b, x = 2.5, 0.5, 0.7
    assert betainc_reg(a, b, x) == pytest.approx(
        1.0 - betainc_reg(b, a, 1.0 - x), abs=1e-13)
    with pytest.raises(ValueError, match="positive"):
        betainc_reg(0.0, 1.0, 0.5)


# ------------------------------------------------------------- cronbach

def test_alpha_identical_items_is_one():
    x = np.array([1.0, 2.0, 5.0, 3.0])
    m = np.stack([x, x, x], axis=1)
    assert cronbach_alpha(m) == pytest.approx(1.0, abs=1e-12)


def test_alpha_one_for_items_equal_up_to_constants():
    x = np.array([1.0, 2.0, 5.0, 3.0])
    m = np.stack([x, x + 1.0, x + 2.0], axis=1)
    assert cronbach_alpha(m) == pytest.approx(1.0, abs=1e-12)


def test_alpha_zero_for_uncorrelated_items():
    # var(sum) = var1 + var2 exactly when the covariance is zero
    m = np.array([[1.0, 1.0], [-1.0, 1.0], [1.0, -1.0], [-1.0, -1.0]])
    assert cronbach_alpha(m) == pytest.approx(0.0, abs=1e-15)


def test_alpha_matches_spreadsheet_style_oracle():
    m = np.array([[3.0, 5.0, 4.0],
                  [4.0, 4.0, 5.0],
                  [2.0, 3.0, 3.0],
                  [5.0, 6.0, 6.0]])
    n, k = m.shape
    # oracle: everything from explicit sums, no numpy statistics
    item_vars = []
    for j in range(k):
        mu = sum(m[i][j] for i in range(n)) / n
        item_vars.append(sum((m[i][j] - mu) ** 2 for i in range(n)) / (n - 1))
    sums = [sum(m[i]) for i in range(n)]
    mu = sum(sums) / n
    var_total = sum((s - mu) ** 2 for s in sums) / (n - 1)
    oracle = k / (k - 1) * (1.0 - sum(item_vars) / var_total)
    assert cronbach_alpha(m) == pytest.approx(oracle, abs=1e-10)


def test_alpha_never_exceeds_one():
    rng = np.random.default_rng(5)
    for _ in range(50):
        n = int(rng.integers(3, 20))
        k = int(rng.integers(2, 7))
        m = rng.uniform(1, 7, size=(n, k))
        assert cronbach_alpha(m) <= 1.0 + 1e-12


def test_alpha_validates():
    with pytest.raises(ValueError, match=">= 2"):
        cronbach_alpha(np.ones((1, 3)))
    with pytest.raises(ValueError, match=">= 2"):
        cronbach_alpha(np.ones((5, 1)))
    with pytest.raises(ValueError, match="zero variance"):
        cronbach_alpha(np.array([[1.0, 2.0], [1.0, 2.0]]))


# ---------------------------------------------------------- descriptives

def test_descriptives_symmetric_vector_has_zero_skew():
    d = descriptives([1.0, 2.0, 3.0])
    assert d.skewness == 0.0
    assert d.kurtosis is None           # undefined below n = 4


def test_descriptives_constant_vector_rejected():
    with pytest.raises(ValueError, match="zero variance"):
        descriptives([4.0, 4.0, 4.0, 4.0])
    with pytest.raises(ValueError, match="n >= 3"):
        descriptives([1.0, 2.0])


def test_descriptives_worked_example_against_moment_oracle():
    data = [2.0, 4.0, 4.0, 4.0, 5.0, 5.0, 7.0, 9.0]
    d = descriptives(data)
    assert d.mean == pytest.approx(5.0, abs=1e-15)
    assert d.sd == pytest.approx(math.sqrt(32.0 / 7.0), abs=1e-12)

    # brute-force moment oracle with explicit corrections
    n = len(data)
    mu = sum(data) / n
    m2 = sum((v - mu) ** 2 for v in data) / n
    m3 = sum((v - mu) ** 3 for v in data) / n
    m4 = sum((v - mu) ** 4 for v in data) / n
    g1 = m3 / m2 ** 1.5
    G1 = math.sqrt(n * (n - 1)) / (n - 2) * g1
    g2 = m4 / m2 ** 2 - 3.0
    G2 = (n - 1) / ((n - 2) * (n - 3)) * ((n + 1) * g2 + 6.0)
    assert d.skewness == pytest.approx(G1, abs=1e-9)
    assert d.kurtosis == pytest.approx(G2, abs=1e-9)
    # frozen values for the record
    assert d.skewness == pytest.approx(0.8184875, abs=1e-6)
    assert d.kurtosis == pytest.approx(0.9406250, abs=1e-6)


# --------------------------------------------------------------- pearson

def test_pearson_perfect_lines():
    x = [1.0, 2.0, 4.0, 7.0]
    r = pearson(x, x)
    assert r.r == 1.0 and r.p == 0.0
    r = pearson(x, [-v for v in x])
    assert r.r == -1.0 and r.p == 0.0


def test_pearson_affine_map_gives_sign_of_slope():
    x = np.random.default_rng(2).uniform(size=12)
    assert pearson(x, 2.5 * x + 3.0).r == pytest.approx(1.0, abs=1e-12)
    assert pearson(x, -0.3 * x + 1.0).r == pytest.approx(-1.0, abs=1e-12)


def test_pearson_748_example():
    x, y = vectors_with_correlation(0.748, 10, seed=4)
    rep = pearson(x, y)
    assert rep.r == pytest.approx(0.748, abs=1e-12)
    assert rep.n == 10
    assert rep.t == pytest.approx(3.1877, abs=5e-4)
    assert rep.p == pytest.approx(0.0129, abs=1e-3)
    assert rep.p < 0.05


def test_pearson_validates():
    with pytest.raises(ValueError, match="mismatch"):
        pearson([1, 2, 3], [1, 2])
    with pytest.raises(ValueError, match="n >= 3"):
        pearson([1, 2], [3, 4])
    with pytest.raises(ValueError, match="constant"):
        pearson([1.0, 1.0, 1.0], [1.0, 2.0, 3.0])


# ------------------------------------------------------------------ ols

def test_ols_exact_line():
    x = np.array([0.0, 1.0, 2.0, 3.0])
    rep = ols_simple(x, 2.0 * x)
    assert rep.beta_std == pytest.approx(1.0, abs=1e-12)
    assert rep.r2 == 1.0 and rep.adj_r2 == 1.0
    assert rep.se_beta_std == 0.0
    assert rep.f == math.inf and rep.p == 0.0


def test_ols_identity_suite_on_random_data():
    rng = np.random.default_rng(6)
    for _ in range(30):
        n = int(rng.integers(3, 51))
        x = rng.normal(size=n)
        y = rng.normal(size=n) + 0.5 * x
        rep = ols_simple(x, y)
        cor = pearson(x, y)
        assert rep.beta_std == pytest.approx(cor.r, abs=1e-10)
        assert rep.r2 == pytest.approx(cor.r ** 2, abs=1e-10)
        if math.isfinite(cor.t):
            assert rep.f == pytest.approx(cor.t ** 2, rel=1e-10)
            assert rep.p == pytest.approx(cor.p, abs=1e-12)
        assert rep.adj_r2 <= rep.r2 + 1e-15
        assert 0.0 <= rep.p <= 1.0


def test_ols_from_748_matches_two_decimal_rounding_but_not_f():
    x, y = vectors_with_correlation(0.748, 10, seed=4)
    rep = ols_simple(x, y)
    assert round(rep.r2, 2) == 0.56
    assert round(rep.adj_r2, 2) == 0.50
    assert 10.1 < rep.f < 10.2          # far from a printed 8.88
    assert rep.se_beta_std == pytest.approx(
        math.sqrt((1 - 0.748 ** 2) / 8), abs=1e-12)


def test_ols_validates():
    with pytest.raises(ValueError, match="degenerate"):
        ols_simple([1.0, 1.0, 1.0], [1.0, 2.0, 3.0])
    with pytest.raises(ValueError, match="constant response"):
        ols_simple([1.0, 2.0, 3.0], [4.0, 4.0, 4.0])


# ---------------------------------------------------------------- t-test

def test_ttest_identical_groups():
    rep = ttest_independent([1.0, 2.0, 3.0], [1.0, 2.0, 3.0])
    assert rep.t == 0.0 and rep.p == 1.0
    assert rep.df == 4


def test_ttest_hand_formula_oracle():
    rep = ttest_independent([1.0, 2.0, 3.0], [4.0, 5.0, 6.0])
    # oracle by hand: mean diff -3, pooled sd 1, se = sqrt(2/3)
    se = math.sqrt(2.0 / 3.0)
    assert rep.t == pytest.approx(-3.0 / se, abs=1e-12)
    assert rep.t == pytest.approx(-3.67423, abs=1e-5)
    assert rep.df == 4
    assert 0.01 < rep.p < 0.05


def test_ttest_summary_mode_group_split():
    rep = ttest_from_summary(3.78, 0.46, 6, 5.17, 0.88, 4)
    assert round(rep.t, 2) == -3.31
    assert rep.df == 8
    assert rep.p < 0.05
    assert rep.variant == "pooled"


def test_ttest_pooled_equals_welch_for_balanced_equal_variance():
    a = np.array([1.0, 2.0, 3.0, 4.0])
    b = a + 1.5                         # identical variance, same n
    pooled = ttest_independent(a, b, variant="pooled")
    welch = ttest_independent(a, b, variant="welch")
    assert abs(pooled.t - welch.t) < 1e-9
    assert abs(pooled.df - welch.df) < 1e-9
    assert abs(pooled.p - welch.p) < 1e-9


def test_ttest_welch_df_is_fractional_when_unbalanced():
    rep = ttest_from_summary(3.78, 0.46, 6, 5.17, 0.88, 4, variant="welch")
    assert rep.df != int(rep.df)
    assert rep.df < 8                   # Welch never exceeds pooled df here


def test_ttest_validates():
    with pytest.raises(ValueError, match="variant"):
        ttest_independent([1.0, 2.0], [3.0, 4.0], variant="student")
    with pytest.raises(ValueError, match="n >= 2"):
        ttest_independent([1.0], [3.0, 4.0])
    with pytest.raises(ValueError, match="zero variance"):
        ttest_from_summary(1.0, 0.0, 5, 2.0, 0.0, 5)
    with pytest.raises(ValueError, match="negative"):
        ttest_from_summary(1.0, -0.1, 5, 2.0, 0.5, 5)


# --------------------------------------------------------------- loader

def survey_rows(n=4, seed=0):
    rng = np.random.default_rng(seed)
    rows = [",".join(CSV_HEADER)]
    for i in range(n):
        chf = rng.integers(1, 8, size=4)
        xai = rng.integers(1, 6, size=15)
        cells = [f"r{i+1}", str(30 + i), str(3 + i), str(i % 2), str((i + 1) % 2),
                 *map(str, chf), *map(str, xai)]
        rows.append(",".join(cells))
    return rows


def write_csv(path, rows):
    path.write_text("\n".join(rows) + "\n")
    return path


def test_load_survey_csv_round_trip(tmp_path):
    path = write_csv(tmp_path / "s.csv", survey_rows(5))
    sv = load_survey_csv(path)
    assert sv.n == 5
    assert sv.chf.shape == (5, 4) and sv.xai.shape == (5, 15)
    assert sv.respondent[0] == "r1"
    assert sv.ai_experience.dtype == bool
    assert sv.composite("CHF").shape == (5,)
    with pytest.raises(ValueError, match="unknown scale"):
        sv.items("FOO")


def test_load_survey_csv_rejects_bad_header(tmp_path):
    rows = survey_rows(3)
    rows[0] = rows[0].replace("CHF1", "CHF_ONE")
    path = write_csv(tmp_path / "s.csv", rows)
    with pytest.raises(ValueError, match="bad survey header"):
        load_survey_csv(path)


def test_load_survey_csv_rejects_missing_and_nonnumeric(tmp_path):
    rows = survey_rows(3)
    parts = rows[2].split(",")
    parts[7] = ""
    rows[2] = ",".join(parts)
    with pytest.raises(ValueError, match="missing value"):
        load_survey_csv(write_csv(tmp_path / "a.csv", rows))
    rows = survey_rows(3)
    parts = rows[1].split(",")
    parts[6] = "seven"
    rows[1] = ",".join(parts)
    with pytest.raises(ValueError, match="non-numeric"):
        load_survey_csv(write_csv(tmp_path / "b.csv", rows))


def test_load_survey_csv_enforces_scale_bounds(tmp_path):
    rows = survey_rows(3)
    parts = rows[1].split(",")
    parts[9] = "9"                       # XAI1 column; 9 > the 1..5 scale
    rows[1] = ",".join(parts)
    path = write_csv(tmp_path / "s.csv", rows)
    with pytest.raises(ValueError, match="outside scale bounds"):
        load_survey_csv(path)


def test_load_survey_csv_reverse_coding(tmp_path):
    path = write_csv(tmp_path / "s.csv", survey_rows(4, seed=3))
    plain = load_survey_csv(path)
    flipped = load_survey_csv(path, reverse_items=("XAI6",))
    j = XAI_ITEMS.index("XAI6")
    assert np.array_equal(flipped.xai[:, j], 6.0 - plain.xai[:, j])
    other = [k for k in range(15) if k != j]
    assert np.array_equal(flipped.xai[:, other], plain.xai[:, other])
    with pytest.raises(ValueError, match="unknown reverse"):
        load_survey_csv(path, reverse_items=("CHF9",))


def test_load_survey_csv_needs_two_respondents(tmp_path):
    path = write_csv(tmp_path / "s.csv", survey_rows(1))
    with pytest.raises(ValueError, match="at least 2"):
        load_survey_csv(path)
    empty = tmp_path / "e.csv"
    empty.write_text("")
    with pytest.raises(ValueError, match="empty survey"):
        load_survey_csv(empty)


def test_stats_report_text_sections(tmp_path):
    path = write_csv(tmp_path / "s.csv", survey_rows(8, seed=9))
    sv = load_survey_csv(path)
    text = stats_report_text(sv)
    assert text.startswith("Respondents: n = 8")
    for heading in ("Scale reliability and descriptives",
                    "Correlation (CHF composite vs XAI composite)",
                    "Simple regression (XAI composite on CHF composite)",
                    "Group differences by AI experience"):
        assert heading in text
    assert "CHF" in text and "XAI" in text
