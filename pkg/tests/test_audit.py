"""Auditing published summary statistics for internal consistency."""

import math

import pytest

from histoxai.audit import (audit_reported, parse_record, render_findings,
                            Finding)
from histoxai.tdist import t_distribution_sf


def by_quantity(findings):
    out = {}
    for f in findings:
        out.setdefault(f.quantity, f)
    return out


# --------------------------------------------------------------- parsing

def test_parse_record_basics():
    rec = parse_record("""
        # regression block
        n = 10
        r = .748   # printed with a star
        chf_item_means = 3.9, 4.5, 4, 5.1
    """)
    assert rec == {"n": "10", "r": ".748",
                   "chf_item_means": "3.9, 4.5, 4, 5.1"}


def test_parse_record_rejects_garbage():
    with pytest.raises(ValueError, match="key = value"):
        parse_record("just words\n")
    with pytest.raises(ValueError, match="duplicate"):
        parse_record("n = 10\nn = 12\n")
    with pytest.raises(ValueError, match="empty key or value"):
        parse_record("n =\n")
    with pytest.raises(ValueError, match="empty record"):
        parse_record("# only a comment\n")


def test_audit_rejects_non_numeric_values_and_bad_n():
    with pytest.raises(ValueError, match="not a number"):
        audit_reported({"n": "10", "r": "strong"})
    with pytest.raises(ValueError, match="integer >= 3"):
        audit_reported({"n": "2", "r": ".5"})
    with pytest.raises(ValueError, match="integer >= 3"):
        audit_reported({"n": "10.5", "r": ".5"})


# ------------------------------------------------- regression identities

def test_audit_r2_family_from_r():
    rec = {"n": "10", "r": ".748", "r2": ".56", "adj_r2": ".50",
           "f": "8.88", "f_p": ".02"}
    got = by_quantity(audit_reported(rec))

    assert got["r2"].verdict == "consistent"
    assert got["r2"].derived == pytest.approx(0.559504, abs=1e-9)
    assert got["r2"].tolerance == pytest.approx(0.005)

    assert got["adj_r2"].verdict == "consistent"
    assert got["adj_r2"].derived == pytest.approx(0.504442, abs=1e-6)

    # F fails its own identity: (n-2) R^2/(1-R^2) is ~10.16, not 8.88
    assert got["f"].verdict == "inconsistent"
    assert 10.1 < got["f"].derived < 10.2

    # ...but the printed p does match the printed F
    assert got["f_p"].verdict == "consistent"
    assert got["f_p"].derived == pytest.approx(
        t_distribution_sf(math.sqrt(8.88), 8), abs=1e-12)


def test_audit_beta_std_is_r():
    got = by_quantity(audit_reported({"r": ".748", "beta_std": ".75"}))
    assert got["beta_std"].verdict == "consistent"
    got = by_quantity(audit_reported({"r": ".3", "beta_std": ".75"}))
    assert got["beta_std"].verdict == "inconsistent"


def test_audit_beta_se_is_always_unverifiable_with_context():
    got = by_quantity(audit_reported(
        {"n": "10", "r": ".748", "beta_se": ".235"}))
    f = got["beta_se"]
    assert f.verdict == "unverifiable"
    assert "unstandardized" in f.note
    assert "0.23" in f.note      # the standardized S.E. hint is offered


def test_audit_r_p_check():
    got = by_quantity(audit_reported({"n": "10", "r": ".748", "r_p": ".013"}))
    assert got["r_p"].verdict == "consistent"
    got = by_quantity(audit_reported({"n": "10", "r": ".748", "r_p": ".2"}))
    assert got["r_p"].verdict == "inconsistent"


def test_audit_unverifiable_without_inputs():
    got = by_quantity(audit_reported({"r2": ".56"}))
    assert got["r2"].verdict == "unverifiable"
    got = by_quantity(audit_reported({"adj_r2": ".50"}))
    assert got["adj_r2"].verdict == "unverifiable"
    got = by_quantity(audit_reported({"f": "8.88"}))
    assert got["f"].verdict == "unverifiable"
    # R^2 alone (without r) still lets adj R^2 and F be derived
    got = by_quantity(audit_reported({"n": "10", "r2": ".56",
                                      "adj_r2": ".50", "f": "8.88"}))
    assert got["adj_r2"].verdict == "consistent"
    assert "reported R^2" in got["adj_r2"].note
    assert got["f"].verdict == "inconsistent"


# ------------------------------------------------------ composite means

def test_audit_composite_mean_envelope():
    rec = {"chf_item_means": "3.9, 4.5, 4, 5.1", "chf_mean": "4.33"}
    got = by_quantity(audit_reported(rec))
    f = got["chf_mean"]
    assert f.derived == pytest.approx(4.375, abs=1e-12)
    assert f.verdict == "consistent"          # |4.375 - 4.33| <= 0.05
    assert f.tolerance == 0.05

    rec = {"chf_item_means": "3.9, 4.5, 4, 5.1", "chf_mean": "4.5"}
    got = by_quantity(audit_reported(rec))
    assert got["chf_mean"].verdict == "inconsistent"


def test_audit_composite_mean_needs_items():
    got = by_quantity(audit_reported({"chf_mean": "4.33"}))
    assert got["chf_mean"].verdict == "unverifiable"
    with pytest.raises(ValueError, match="number list"):
        audit_reported({"chf_item_means": "3.9, four", "chf_mean": "4.33"})


# -------------------------------------------------------- group t checks

def test_audit_t_with_stated_split():
    rec = {"chf_group1_mean": "3.78", "chf_group1_sd": ".46",
           "chf_group1_n": "6",
           "chf_group2_mean": "5.17", "chf_group2_sd": ".88",
           "chf_group2_n": "4",
           "chf_t": "-3.31"}
    got = by_quantity(audit_reported(rec))
    f = got["chf_t"]
    assert f.verdict == "consistent"
    assert f.derived == pytest.approx(-3.312302, abs=1e-5)
    assert "stated split 6/4" in f.note


def test_audit_t_split_search_finds_reproducing_splits():
    rec = {"n": "10",
           "chf_group1_mean": "3.78", "chf_group1_sd": ".46",
           "chf_group2_mean": "5.17", "chf_group2_sd": ".88",
           "chf_t": "-3.31"}
    got = by_quantity(audit_reported(rec))
    f = got["chf_t"]
    assert f.verdict == "consistent"
    # both 6/4 and 8/2 reproduce the printed t inside the envelope; the
    # auditor reports every hit rather than pretending uniqueness
    assert "6/4" in f.note and "8/2" in f.note
    assert f.tolerance == 0.05


def test_audit_t_split_search_flags_irreproducible_t():
    rec = {"n": "10",
           "xai_group1_mean": "3.27", "xai_group1_sd": ".46",
           "xai_group2_mean": "3.82", "xai_group2_sd": ".46",
           "xai_t": "-1.79", "xai_t_p": ".15"}
    got = by_quantity(audit_reported(rec))
    assert got["xai_t"].verdict == "inconsistent"
    assert "closest is 3/7" in got["xai_t"].note
    # the printed p doesn't survive its own printed t either (df = 8
    # two-sided p of 1.79 is ~0.111)
    assert got["xai_t_p"].verdict == "inconsistent"
    assert got["xai_t_p"].derived == pytest.approx(0.11124, abs=1e-4)


def test_audit_t_unverifiable_without_summaries_or_n():
    got = by_quantity(audit_reported({"chf_t": "-3.31"}))
    assert got["chf_t"].verdict == "unverifiable"
    rec = {"chf_group1_mean": "3.78", "chf_group1_sd": ".46",
           "chf_group2_mean": "5.17", "chf_group2_sd": ".88",
           "chf_t": "-3.31"}
    got = by_quantity(audit_reported(rec))
    assert got["chf_t"].verdict == "unverifiable"
    assert "group sizes or total n" in got["chf_t"].note


def test_audit_unknown_key_is_reported_not_dropped():
    got = by_quantity(audit_reported({"r": ".5", "chi2": "3.84"}))
    assert got["chi2"].verdict == "unverifiable"
    assert "unrecognized" in got["chi2"].note


# -------------------------------------------------------------- rendering

def test_render_findings_layout():
    findings = audit_reported({"n": "10", "r": ".748", "r2": ".56",
                               "f": "8.88", "beta_se": ".13"})
    text = render_findings(findings)
    lines = text.splitlines()
    assert lines[0].split() == ["quantity", "reported", "derived",
                                "tolerance", "verdict"]
    assert any("inconsistent" in line for line in lines)
    assert "n/a" in text                       # beta_se has no tolerance
    counts = lines[-1]
    assert counts.startswith(f"{len(findings)} checks:")
    assert "1 inconsistent" in counts and "1 unverifiable" in counts


def test_render_empty_is_well_formed():
    text = render_findings([])
    assert "0 checks" in text


def test_full_paper_style_record_end_to_end():
    text = """
        # summary-statistics audit record
        n = 10
        r = .748
        r2 = .56
        adj_r2 = .50
        f = 8.88
        f_p = .02
        beta_std = .75
        beta_se = .235
        chf_item_means = 3.9, 4.5, 4, 5.1
        chf_mean = 4.33
        chf_group1_mean = 3.78
        chf_group1_sd = .46
        chf_group2_mean = 5.17
        chf_group2_sd = .88
        chf_t = -3.31
        chf_t_p = .01
        xai_group1_mean = 3.27
        xai_group1_sd = .46
        xai_group2_mean = 3.82
        xai_group2_sd = .46
        xai_t = -1.79
        xai_t_p = .15
    """
    got = by_quantity(audit_reported(parse_record(text)))
    verdicts = {q: f.verdict for q, f in got.items()}
    assert verdicts == {
        "r2": "consistent",
        "adj_r2": "consistent",
        "f": "inconsistent",
        "f_p": "consistent",
        "beta_std": "consistent",
        "beta_se": "unverifiable",
        "chf_mean": "consistent",
        "chf_t": "consistent",
        "chf_t_p": "consistent",
        "xai_t": "inconsistent",
        "xai_t_p": "inconsistent",
    }
