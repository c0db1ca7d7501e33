"""Evaluation statistics: Wilson intervals, paired t, Friedman,
Wilcoxon signed-rank, one-way repeated-measures ANOVA, and frame-level
detection accuracy.

Conventions where the underlying procedure leaves a choice: sample
standard deviations use the n-1 denominator; Wilcoxon drops zero
differences and average-ranks ties; Friedman average-ranks ties within
each row; no sphericity correction is applied to the RM ANOVA.
"""

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .special import chi2_sf, f_sf, norm_cdf, norm_ppf, t_sf_two_sided


class InvalidInput(ValueError):
    pass


@dataclass(frozen=True)
class TrialMatrix:
    """Complete participant x method grid of one aggregated metric."""

    methods: tuple
    participants: tuple
    values: np.ndarray  # shape (participants, methods)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "methods", tuple(self.methods))
        object.__setattr__(self, "participants", tuple(self.participants))
        if v.shape != (len(self.participants), len(self.methods)):
            raise InvalidInput("grid shape does not match labels")
        if np.isnan(v).any():
            missing = [(self.participants[i], self.methods[j])
                       for i, j in zip(*np.nonzero(np.isnan(v)))]
            raise InvalidInput(f"incomplete grid, missing cells: {missing}")


def wilson_ci(successes, n, confidence=0.95):
    """Wilson score interval for a binomial proportion."""
    if n < 1:
        raise InvalidInput("n must be >= 1")
    if not (0 <= successes <= n):
        raise InvalidInput("successes must be in [0, n]")
    z = norm_ppf(1.0 - (1.0 - confidence) / 2.0)
    phat = successes / n
    denom = 1.0 + z * z / n
    center = (phat + z * z / (2 * n)) / denom
    spread = z * math.sqrt(phat * (1 - phat) / n + z * z / (4 * n * n)) / denom
    return max(0.0, center - spread), min(1.0, center + spread)


def paired_t(a, b):
    """Paired two-sided t-test.

    Returns (t, p).  All-zero differences are degenerate: (0.0, 1.0).
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1 or len(a) < 2:
        raise InvalidInput("need two equal-length samples of size >= 2")
    d = a - b
    if np.all(d == 0):
        return 0.0, 1.0
    n = len(d)
    sd = float(np.std(d, ddof=1))
    if sd == 0:
        # Constant non-zero difference: infinitely significant.
        return math.copysign(math.inf, float(np.mean(d))), 0.0
    t = float(np.mean(d)) / (sd / math.sqrt(n))
    return t, t_sf_two_sided(t, n - 1)


def _rankdata(values):
    """Average ranks (1-based) with ties sharing their mean rank."""
    values = np.asarray(values, dtype=np.float64)
    order = np.argsort(values, kind="stable")
    ranks = np.empty(len(values))
    i = 0
    while i < len(values):
        j = i
        while j + 1 < len(values) and values[order[j + 1]] == values[order[i]]:
            j += 1
        ranks[order[i:j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    return ranks


def friedman(matrix: TrialMatrix):
    """Friedman rank test across methods; chi-square approximation."""
    n, k = matrix.values.shape
    if k < 2 or n < 2:
        raise InvalidInput("need >= 2 methods and >= 2 participants")
    ranks = np.vstack([_rankdata(row) for row in matrix.values])
    mean_ranks = ranks.mean(axis=0)
    chi2 = 12.0 * n / (k * (k + 1)) * float(np.sum((mean_ranks - (k + 1) / 2.0) ** 2))
    return chi2, chi2_sf(chi2, k - 1)


def wilcoxon_signed_rank(a, b, exact_limit=12):
    """Wilcoxon signed-rank test, W = min(W+, W-).

    Zero differences are dropped before ranking.  Exact p by full sign
    enumeration for n <= exact_limit, normal approximation with
    continuity correction above.  All-zero differences: (0.0, 1.0).
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1:
        raise InvalidInput("need two equal-length samples")
    d = a - b
    d = d[d != 0]
    n = len(d)
    if n == 0:
        return 0.0, 1.0
    ranks = _rankdata(np.abs(d))
    w_plus = float(ranks[d > 0].sum())
    w_minus = float(ranks[d < 0].sum())
    w = min(w_plus, w_minus)
    if n <= exact_limit:
        total = float(ranks.sum())
        count = 0
        for signs in itertools.product((0, 1), repeat=n):
            wp = sum(r for r, s in zip(ranks, signs) if s)
            if min(wp, total - wp) <= w + 1e-9:
                count += 1
        return w, count / 2.0 ** n
    mu = n * (n + 1) / 4.0
    _, tie_counts = np.unique(ranks, return_counts=True)
    sigma2 = n * (n + 1) * (2 * n + 1) / 24.0 - float(np.sum(tie_counts ** 3 - tie_counts)) / 48.0
    z = (w - mu + 0.5) / math.sqrt(sigma2)
    return w, min(1.0, 2.0 * norm_cdf(z))


def rm_anova_oneway(matrix: TrialMatrix):
    """One-way repeated-measures ANOVA (no sphericity correction).

    Classical partition: SS_total = SS_subjects + SS_treatment + SS_error;
    F = MS_treatment / MS_error on (k-1, (k-1)(n-1)) df.
    """
    v = matrix.values
    n, k = v.shape
    if k < 2 or n < 2:
        raise InvalidInput("need >= 2 methods and >= 2 participants")
    grand = v.mean()
    ss_total = float(np.sum((v - grand) ** 2))
    ss_subjects = k * float(np.sum((v.mean(axis=1) - grand) ** 2))
    ss_treatment = n * float(np.sum((v.mean(axis=0) - grand) ** 2))
    ss_error = ss_total - ss_subjects - ss_treatment
    df_t = k - 1
    df_e = (k - 1) * (n - 1)
    if ss_treatment <= 0:
        return 0.0, 1.0
    if ss_error <= 0:
        return math.inf, 0.0
    f = (ss_treatment / df_t) / (ss_error / df_e)
    return f, f_sf(f, df_t, df_e)


def frame_eval(frames, target):
    """Frame-level detection accuracy with Wilson CI.

    ``frames`` is a list of (truth_label_or_None, predicted_detection_or_None);
    a frame is correct iff the target is present and predicted with a
    matching label, or absent and not predicted.
    """
    if not frames:
        raise InvalidInput("frame list is empty")
    from ..intent import normalize_query
    target_norm = normalize_query(target)
    correct = fp = fn = 0
    for truth, predicted in frames:
        present = truth is not None and normalize_query(truth) == target_norm
        pred_label = None if predicted is None else normalize_query(predicted.label)
        if present:
            if pred_label == target_norm:
                correct += 1
            elif predicted is None:
                fn += 1
            else:
                fp += 1  # predicted a wrong object
        else:
            if predicted is None:
                correct += 1
            else:
                fp += 1
    n = len(frames)
    accuracy = correct / n
    return accuracy, wilson_ci(correct, n), fp, fn
