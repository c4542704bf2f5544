"""Common spatial pattern filters, their orthonormal trace-ratio variant,
and the classification protocol used to compare them on two-class EEG."""

from .classify import LdaModel, MdrmModel, lda_fit, lda_predict, logvar_features, mdrm_fit, mdrm_predict
from .covariance import class_covariances, composite, regularize
from .csp import FilterBank, Method, column_correlation, csp_approach1, csp_approach2, ratio1, ratio2, rcsp
from .data import Dataset, Epoch, SynthParams, bandpass_fir, extract_window, generate_synthetic, read_epo, write_epo
from .harness import ExperimentConfig, ExperimentReport, crossval_lambda, render_report, run_experiment
from .spdgeom import airm_distance, riemannian_mean, spd_map, sym_eig, whitening
from .stiefel import TraceRatioResult, rsm_filters, sm_filters, trace_ratio_max

__version__ = "0.1.0"

__all__ = [
    "Dataset", "Epoch", "SynthParams", "bandpass_fir", "extract_window", "generate_synthetic", "read_epo", "write_epo",
    "class_covariances", "composite", "regularize",
    "airm_distance", "riemannian_mean", "spd_map", "sym_eig", "whitening",
    "FilterBank", "Method", "column_correlation", "csp_approach1", "csp_approach2", "ratio1", "ratio2", "rcsp",
    "TraceRatioResult", "rsm_filters", "sm_filters", "trace_ratio_max",
    "LdaModel", "MdrmModel", "lda_fit", "lda_predict", "logvar_features", "mdrm_fit", "mdrm_predict",
    "ExperimentConfig", "ExperimentReport", "crossval_lambda", "render_report", "run_experiment",
]
