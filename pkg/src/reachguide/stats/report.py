"""Aggregation and report shaping for trial logs.

Consumes line-record (JSONL) trial logs or the CSV variant with explicit
(participant, method, object, metrics) columns; emits aligned text
tables and CSV in the per-method metric order: search time, guidance
time, total time, undesired touches, accuracy.
"""

import csv
import itertools
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .inference import (InvalidInput, TrialMatrix, friedman, paired_t,
                        rm_anova_oneway, wilcoxon_signed_rank)

METRIC_ORDER = ("search_time_s", "guidance_time_s", "total_time_s", "undesired_touches")

METRIC_TITLES = {
    "search_time_s": "Search Time (s)",
    "guidance_time_s": "Guidance Time (s)",
    "total_time_s": "Total Time (s)",
    "undesired_touches": "Undesired Touches",
}


def read_trial_log(path):
    """JSON-object-per-line trial records."""
    records = []
    with open(path) as f:
        for line in f:
            line = line.strip()
            if line:
                records.append(json.loads(line))
    return records


def read_trial_csv(path):
    """CSV variant: participant, method, object plus metric columns."""
    records = []
    with open(path, newline="") as f:
        for row in csv.DictReader(f):
            rec = dict(row)
            for key in METRIC_ORDER + ("success",):
                if key in rec and rec[key] != "":
                    rec[key] = float(rec[key])
            records.append(rec)
    return records


def mean_sd(values):
    """(mean, sample sd) with the n-1 denominator; sd is NaN for n < 2."""
    v = np.asarray(values, dtype=np.float64)
    mean = float(v.mean())
    sd = float(v.std(ddof=1)) if len(v) >= 2 else math.nan
    return mean, sd


def summarize(records, group_key=("method",)):
    """Per-group mean +/- sd for every metric, plus success rate.

    Returns {group_tuple: {metric: (mean, sd, n)}}; empty inputs yield an
    empty table.
    """
    if isinstance(group_key, str):
        group_key = (group_key,)
    groups = {}
    for rec in records:
        key = tuple(str(rec.get(k, "")) for k in group_key)
        groups.setdefault(key, []).append(rec)
    table = {}
    for key in sorted(groups):
        recs = groups[key]
        row = {}
        for metric in METRIC_ORDER:
            values = [float(r[metric]) for r in recs if metric in r]
            if values:
                m, sd = mean_sd(values)
                row[metric] = (m, sd, len(values))
        successes = [1.0 if r.get("success") else 0.0 for r in recs if "success" in r]
        if successes:
            row["accuracy"] = (sum(successes) / len(successes), math.nan, len(successes))
        table[key] = row
    return table


def build_matrix(records, metric, methods=None):
    """Participant x method grid; each cell is the mean over that
    participant's trials.  Missing cells are an error naming the cell."""
    if methods is None:
        methods = sorted({str(r["method"]) for r in records})
    participants = sorted({str(r.get("participant", r.get("seed", ""))) for r in records})
    cells = {}
    for rec in records:
        key = (str(rec.get("participant", rec.get("seed", ""))), str(rec["method"]))
        cells.setdefault(key, []).append(float(rec[metric]))
    values = np.full((len(participants), len(methods)), np.nan)
    missing = []
    for i, p in enumerate(participants):
        for j, m in enumerate(methods):
            vals = cells.get((p, m))
            if vals:
                values[i, j] = float(np.mean(vals))
            else:
                missing.append((p, m))
    if missing:
        raise InvalidInput(f"incomplete grid, missing cells: {missing}")
    return TrialMatrix(methods=tuple(methods), participants=tuple(participants), values=values)


@dataclass(frozen=True)
class TestResult:
    name: str
    statistic: float
    p_value: float
    corrected_alpha: float
    significant: bool


def run_method_tests(matrix: TrialMatrix, alpha=0.05, tests=("anova", "friedman", "t", "wilcoxon")):
    """Omnibus tests plus Bonferroni-corrected pairwise comparisons."""
    results = []
    pairs = list(itertools.combinations(range(len(matrix.methods)), 2))
    corrected = alpha / len(pairs) if pairs else alpha
    if "anova" in tests:
        f, p = rm_anova_oneway(matrix)
        results.append(TestResult("RM ANOVA (F)", f, p, alpha, p < alpha))
    if "friedman" in tests:
        chi2, p = friedman(matrix)
        results.append(TestResult("Friedman (chi2)", chi2, p, alpha, p < alpha))
    for i, j in pairs:
        a, b = matrix.values[:, i], matrix.values[:, j]
        label = f"{matrix.methods[i]} vs {matrix.methods[j]}"
        if "t" in tests:
            t, p = paired_t(a, b)
            results.append(TestResult(f"paired t: {label}", t, p, corrected, p < corrected))
        if "wilcoxon" in tests:
            w, p = wilcoxon_signed_rank(a, b)
            results.append(TestResult(f"Wilcoxon: {label}", w, p, corrected, p < corrected))
    return results


def format_summary_table(table, group_key=("method",)):
    lines = []
    header = " | ".join(k for k in group_key)
    metrics = METRIC_ORDER + ("accuracy",)
    titles = [METRIC_TITLES.get(m, "Accuracy") for m in metrics]
    lines.append(f"{header:24s} " + " ".join(f"{t:>22s}" for t in titles))
    for key, row in table.items():
        cells = []
        for metric in metrics:
            if metric not in row:
                cells.append(f"{'-':>22s}")
                continue
            mean, sd, _n = row[metric]
            if math.isnan(sd):
                cells.append(f"{mean:>22.3f}")
            else:
                cells.append(f"{f'{mean:.2f} +/- {sd:.2f}':>22s}")
        lines.append(f"{' | '.join(key):24s} " + " ".join(cells))
    return "\n".join(lines)


def format_test_results(results):
    lines = [f"{'test':40s} {'stat':>12s} {'p':>12s} {'alpha':>8s} {'sig':>4s}"]
    for r in results:
        lines.append(f"{r.name:40s} {r.statistic:>12.4f} {r.p_value:>12.3g} "
                     f"{r.corrected_alpha:>8.4f} {'*' if r.significant else '':>4s}")
    return "\n".join(lines)


def write_summary_csv(table, path, group_key=("method",)):
    metrics = METRIC_ORDER + ("accuracy",)
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(list(group_key) + [f"{m}_{s}" for m in metrics for s in ("mean", "sd", "n")])
        for key, row in table.items():
            out = list(key)
            for metric in metrics:
                if metric in row:
                    mean, sd, n = row[metric]
                    out += [mean, sd, n]
                else:
                    out += ["", "", ""]
            writer.writerow(out)
