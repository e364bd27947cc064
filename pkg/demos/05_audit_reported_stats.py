"""Cross-check a published block of survey statistics for consistency.

Writes a record file of rounded summary numbers (the kind a results
section reports: r, R^2, F, group means/SDs, t values), then asks the
auditor which of them are mutually consistent once rounding envelopes
are taken into account.  The final t-test line is deliberately wrong so
the report shows what a flagged inconsistency looks like.
"""

from pathlib import Path

from histoxai.audit import audit_reported, parse_record, render_findings

RECORD = """\
# Published summary statistics, as printed (2 dp unless shown otherwise).
n = 10
r = .748
r_p = .013
r2 = .56
adj_r2 = .50
f = 10.16
f_p = .013
beta_std = .75
beta_se = .235

chf_item_means = 3.9, 4.5, 4, 5.1
chf_mean = 4.33
chf_group1_mean = 3.78
chf_group1_sd = .46
chf_group1_n = 6
chf_group2_mean = 5.17
chf_group2_sd = .88
chf_group2_n = 4
chf_t = -3.31
chf_t_p = .05
"""

OUT = Path("demo_output")
OUT.mkdir(exist_ok=True)
path = OUT / "reported_stats.txt"
path.write_text(RECORD)
print(f"wrote {path}\n")

findings = audit_reported(parse_record(path.read_text()))
print(render_findings(findings))

bad = [f for f in findings if f.verdict == "inconsistent"]
print(f"\n{len(bad)} inconsistent quantit{'y' if len(bad) == 1 else 'ies'}:"
      f" {', '.join(f.quantity for f in bad) or 'none'}")
