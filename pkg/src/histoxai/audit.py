"""Consistency audit of published summary statistics.

Given only the numbers a results section prints (no raw data), many are
redundant: R^2 must equal r^2, F must equal (n-2)R^2/(1-R^2), a scale's
composite mean must equal the mean of its item means, a two-group t must
be reproducible from the printed group means/sds for *some* integer
split of the stated sample. This module recomputes every derivable
quantity from the reported record and attaches a verdict per reported
value:

* ``consistent``   -- derived value within tolerance of the reported one
* ``inconsistent`` -- derivable, but disagrees beyond tolerance
* ``unverifiable`` -- the record lacks the inputs to derive it (or the
                      printed quantity is ambiguous, which the note says)

Tolerances follow the rounding of the printed value (half an ulp of its
last decimal), except composite means and group t statistics, which get
a ±0.05 envelope because their *inputs* are themselves rounded.

Record format: flat ``key = value`` lines, ``#`` comments. Keys:

    n = 10
    r = .748            r_p = .02          (optional r_n overrides n)
    r2 = .56            adj_r2 = .50
    f = 8.88            f_p = .02
    beta_std = .75      beta_se = .13
    chf_item_means = 3.9, 4.5, 4, 5.1
    chf_mean = 4.33
    chf_group1_mean = 3.78   chf_group1_sd = .46   (chf_group1_n = 6)
    chf_group2_mean = 5.17   chf_group2_sd = .88   (chf_group2_n = 4)
    chf_t = -3.31            chf_t_p = .01

Any ``<tag>_`` prefix works for scales; group sizes may be omitted, in
which case every split of n is searched and the note reports which
splits (if any) reproduce the printed t.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

from .surveystats import ttest_from_summary
from .tdist import t_distribution_sf

T_ENVELOPE = 0.05          # rounded group summaries -> loose t tolerance
COMPOSITE_ENVELOPE = 0.05  # rounded item means -> loose composite tolerance

_TOP_KEYS = {"n", "r", "r_p", "r_n", "r2", "adj_r2", "f", "f_p",
             "beta_std", "beta_se"}
_TAG_RE = re.compile(
    r"^([a-z][a-z0-9]*)_(item_means|mean|t|t_p|group[12]_(?:mean|sd|n))$")


@dataclass(frozen=True)
class Finding:
    quantity: str
    reported: float | None
    derived: float | None
    tolerance: float | None
    verdict: str              # consistent | inconsistent | unverifiable
    note: str = ""


def parse_record(text: str) -> dict[str, str]:
    """Parse ``key = value`` lines into an ordered string->string map."""
    rec: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"record line {lineno}: expected 'key = value', "
                             f"got {raw.strip()!r}")
        key, val = (part.strip() for part in line.split("=", 1))
        if not key or not val:
            raise ValueError(f"record line {lineno}: empty key or value")
        key = key.lower()
        if key in rec:
            raise ValueError(f"record line {lineno}: duplicate key {key!r}")
        rec[key] = val
    if not rec:
        raise ValueError("empty record: nothing to audit")
    return rec


def audit_reported(record: dict) -> list[Finding]:
    """Run every applicable consistency check over a parsed record."""
    rec = {str(k).lower(): str(v) for k, v in record.items()}
    findings: list[Finding] = []

    def num(key):
        val = rec.get(key)
        if val is None:
            return None
        try:
            return float(val)
        except ValueError:
            raise ValueError(f"record value for {key!r} is not a number: "
                             f"{val!r}") from None

    n = num("n")
    if n is not None and (n != int(n) or n < 3):
        raise ValueError(f"n must be an integer >= 3, got {rec['n']!r}")
    n = int(n) if n is not None else None
    r = num("r")
    r2_rep = num("r2")

    # preferred source for R^2-derived identities: r itself, else printed R^2
    if r is not None:
        r2_src, r2_src_name = r * r, "r"
    elif r2_rep is not None:
        r2_src, r2_src_name = r2_rep, "reported R^2"
    else:
        r2_src = r2_src_name = None

    if r2_rep is not None:
        if r is None:
            findings.append(_unverifiable("r2", r2_rep, "needs r to derive R^2"))
        else:
            findings.append(_compare("r2", rec["r2"], r * r,
                                     note="derived as r^2"))

    if "adj_r2" in rec:
        if r2_src is None or n is None:
            findings.append(_unverifiable("adj_r2", num("adj_r2"),
                                          "needs R^2 (or r) and n"))
        else:
            derived = 1.0 - (1.0 - r2_src) * (n - 1) / (n - 2)
            findings.append(_compare("adj_r2", rec["adj_r2"], derived,
                                     note=f"from {r2_src_name} and n={n}"))

    if "f" in rec:
        if r2_src is None or n is None or r2_src >= 1.0:
            findings.append(_unverifiable("f", num("f"),
                                          "needs R^2 (or r) < 1 and n"))
        else:
            derived = (n - 2) * r2_src / (1.0 - r2_src)
            findings.append(_compare("f", rec["f"], derived,
                                     note=f"from {r2_src_name} and n={n}"))

    if "f_p" in rec:
        f_rep = num("f")
        if f_rep is None or n is None or f_rep < 0:
            findings.append(_unverifiable("f_p", num("f_p"),
                                          "needs the printed F and n"))
        else:
            derived = t_distribution_sf(math.sqrt(f_rep), n - 2)
            findings.append(_compare(
                "f_p", rec["f_p"], derived,
                note=f"two-sided p of the printed F({1},{n - 2})"))

    if "beta_std" in rec:
        if r is None:
            findings.append(_unverifiable("beta_std", num("beta_std"),
                                          "needs r (beta_std = r)"))
        else:
            findings.append(_compare("beta_std", rec["beta_std"], r,
                                     note="identity beta_std = r"))

    if "beta_se" in rec:
        derived = None
        if r2_src is not None and n is not None and r2_src < 1.0:
            derived = math.sqrt((1.0 - r2_src) / (n - 2))
        findings.append(Finding(
            "beta_se", num("beta_se"), derived, None, "unverifiable",
            note="printed S.E. may belong to the unstandardized "
                 "coefficient, which raw-data sds are needed to derive"
                 + (f"; S.E. of the standardized beta would be {derived:.4f}"
                    if derived is not None else "")))

    if "r_p" in rec:
        rn = num("r_n")
        rn = int(rn) if rn is not None else n
        if r is None or rn is None or abs(r) >= 1.0:
            findings.append(_unverifiable("r_p", num("r_p"),
                                          "needs |r| < 1 and n"))
        else:
            t = r * math.sqrt(rn - 2) / math.sqrt(1.0 - r * r)
            findings.append(_compare("r_p", rec["r_p"],
                                     t_distribution_sf(t, rn - 2),
                                     note=f"from r and n={rn} (t={t:.3f})"))

    tags = sorted({m.group(1) for k in rec if (m := _TAG_RE.match(k))})
    for tag in tags:
        findings.extend(_tag_findings(tag, rec, num, n))

    known = set(_TOP_KEYS)
    for k in rec:
        if k not in known and not _TAG_RE.match(k):
            findings.append(Finding(k, None, None, None, "unverifiable",
                                    note="unrecognized key"))
    return findings


def _tag_findings(tag: str, rec, num, n: int | None) -> list[Finding]:
    out = []
    items_key = f"{tag}_item_means"
    if f"{tag}_mean" in rec:
        if items_key in rec:
            items = _parse_floats(rec[items_key], items_key)
            derived = sum(items) / len(items)
            out.append(_compare(f"{tag}_mean", rec[f"{tag}_mean"], derived,
                                tol=COMPOSITE_ENVELOPE,
                                note=f"mean of {len(items)} item means, "
                                     f"rounding envelope +/-{COMPOSITE_ENVELOPE}"))
        else:
            out.append(_unverifiable(f"{tag}_mean", num(f"{tag}_mean"),
                                     f"needs {items_key}"))

    if f"{tag}_t" in rec:
        out.append(_t_finding(tag, rec, num, n))
    if f"{tag}_t_p" in rec:
        t_rep = num(f"{tag}_t")
        df = None
        if n is not None:
            df = n - 2
        n1, n2 = num(f"{tag}_group1_n"), num(f"{tag}_group2_n")
        if n1 is not None and n2 is not None:
            df = int(n1) + int(n2) - 2
        if t_rep is None or df is None or df < 1:
            out.append(_unverifiable(f"{tag}_t_p", num(f"{tag}_t_p"),
                                     "needs the printed t and group sizes"))
        else:
            out.append(_compare(f"{tag}_t_p", rec[f"{tag}_t_p"],
                                t_distribution_sf(t_rep, df),
                                note=f"two-sided p of the printed t, df={df}"))
    return out


def _t_finding(tag: str, rec, num, n: int | None) -> Finding:
    t_rep_s = rec[f"{tag}_t"]
    t_rep = float(t_rep_s)
    parts = {}
    for g in (1, 2):
        for fieldname in ("mean", "sd"):
            v = num(f"{tag}_group{g}_{fieldname}")
            if v is None:
                return _unverifiable(
                    f"{tag}_t", t_rep,
                    f"needs {tag}_group{{1,2}}_{{mean,sd}} summaries")
            parts[f"{fieldname}{g}"] = v
    n1, n2 = num(f"{tag}_group1_n"), num(f"{tag}_group2_n")

    def pooled_t(k1: int, k2: int) -> float:
        return ttest_from_summary(parts["mean1"], parts["sd1"], k1,
                                  parts["mean2"], parts["sd2"], k2,
                                  variant="pooled").t

    if n1 is not None and n2 is not None:
        derived = pooled_t(int(n1), int(n2))
        return _compare(f"{tag}_t", t_rep_s, derived, tol=T_ENVELOPE,
                        note=f"pooled t at the stated split "
                             f"{int(n1)}/{int(n2)}")
    if n is None:
        return _unverifiable(f"{tag}_t", t_rep,
                             "needs group sizes or total n to search splits")
    hits, best = [], None
    for k1 in range(2, n - 1):
        t = pooled_t(k1, n - k1)
        gap = abs(t - t_rep)
        if best is None or gap < best[0]:
            best = (gap, k1, t)
        if gap <= T_ENVELOPE:
            hits.append((k1, n - k1, t))
    if hits:
        splits = ", ".join(f"{a}/{b} (t={t:.3f})" for a, b, t in hits)
        uniq = "unique split" if len(hits) == 1 else f"{len(hits)} splits"
        return Finding(f"{tag}_t", t_rep, hits[0][2], T_ENVELOPE,
                       "consistent",
                       note=f"reproduced by {uniq} of n={n}: {splits}")
    gap, k1, t = best
    return Finding(f"{tag}_t", t_rep, t, T_ENVELOPE, "inconsistent",
                   note=f"no split of n={n} reproduces it; closest is "
                        f"{k1}/{n - k1} with t={t:.3f} (gap {gap:.3f})")


def render_findings(findings: list[Finding]) -> str:
    """Aligned plain-text audit report."""
    header = ("quantity", "reported", "derived", "tolerance", "verdict")
    rows = []
    for f in findings:
        rows.append((
            f.quantity,
            _num_str(f.reported),
            _num_str(f.derived),
            _num_str(f.tolerance),
            f.verdict,
        ))
    widths = [max(len(header[i]), *(len(r[i]) for r in rows)) if rows
              else len(header[i]) for i in range(5)]
    fmt = "  ".join(f"{{:<{w}}}" for w in widths)
    lines = [fmt.format(*header), fmt.format(*("-" * w for w in widths))]
    for f, row in zip(findings, rows):
        line = fmt.format(*row)
        if f.note:
            line += f"  {f.note}"
        lines.append(line.rstrip())
    counts = {"consistent": 0, "inconsistent": 0, "unverifiable": 0}
    for f in findings:
        counts[f.verdict] += 1
    lines.append("")
    lines.append(f"{len(findings)} checks: "
                 f"{counts['consistent']} consistent, "
                 f"{counts['inconsistent']} inconsistent, "
                 f"{counts['unverifiable']} unverifiable")
    return "\n".join(lines) + "\n"


def _decimals(text: str) -> int:
    t = text.strip().lstrip("+-")
    return len(t.split(".", 1)[1]) if "." in t else 0


def _compare(quantity: str, reported_str: str, derived: float,
             tol: float | None = None, note: str = "") -> Finding:
    reported = float(reported_str)
    if tol is None:
        tol = 0.5 * 10.0 ** (-_decimals(reported_str))
    # the 1e-12 slack keeps exact-tie comparisons (|gap| == tol) from
    # flipping on float round-off
    verdict = ("consistent" if abs(derived - reported) <= tol + 1e-12
               else "inconsistent")
    return Finding(quantity, reported, derived, tol, verdict, note=note)


def _unverifiable(quantity: str, reported, note: str) -> Finding:
    return Finding(quantity, reported, None, None, "unverifiable", note=note)


def _parse_floats(text: str, key: str) -> list[float]:
    try:
        vals = [float(p) for p in text.split(",") if p.strip()]
    except ValueError:
        raise ValueError(f"record value for {key!r} is not a comma-separated "
                         f"number list: {text!r}") from None
    if not vals:
        raise ValueError(f"record value for {key!r} is empty")
    return vals


def _num_str(v) -> str:
    if v is None:
        return "n/a"
    return f"{v:.4f}".rstrip("0").rstrip(".") if isinstance(v, float) else str(v)
