from .harmonic import harmonic_function
from .nontangential import default_annuli, nt_report
from .stochastic import lemma53_check, prop52_check, stochastic_report, stopped_martingale_check
from .theorem import classify, pole_censor_depth, theorem_experiment
from .lemmas import free_srw_bound, lemma61_check, lemma62_check, out_of_tube_points
from .corollaries import corollary_checks, nt_stability_check, spike_check, tail_in_tube_check, thetas_in_region
from .eta_bound import eta_tau_bound_check

__all__ = [
    "harmonic_function",
    "default_annuli",
    "nt_report",
    "lemma53_check",
    "prop52_check",
    "stochastic_report",
    "stopped_martingale_check",
    "classify",
    "pole_censor_depth",
    "theorem_experiment",
    "free_srw_bound",
    "lemma61_check",
    "lemma62_check",
    "out_of_tube_points",
    "corollary_checks",
    "nt_stability_check",
    "spike_check",
    "tail_in_tube_check",
    "thetas_in_region",
    "eta_tau_bound_check",
]
