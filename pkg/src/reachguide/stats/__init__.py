from .inference import (InvalidInput, TrialMatrix, frame_eval, friedman,
                        paired_t, rm_anova_oneway, wilcoxon_signed_rank,
                        wilson_ci)
from .report import (build_matrix, format_summary_table, format_test_results,
                     read_trial_csv, read_trial_log, run_method_tests,
                     summarize, write_summary_csv)
from .special import chi2_sf, f_sf, norm_cdf, norm_ppf, t_sf_two_sided

__all__ = [
    "InvalidInput", "TrialMatrix", "frame_eval", "friedman", "paired_t",
    "rm_anova_oneway", "wilcoxon_signed_rank", "wilson_ci",
    "build_matrix", "format_summary_table", "format_test_results",
    "read_trial_csv", "read_trial_log", "run_method_tests", "summarize",
    "write_summary_csv",
    "chi2_sf", "f_sf", "norm_cdf", "norm_ppf", "t_sf_two_sided",
]
