"""PCA-based operator learning: samplers, solvers, PCA, surrogates and checks."""

from ._core import (
    ConfigError,
    Dataset,
    DomainKind,
    DomainError,
    Error,
    Grid,
    NumericalError,
    PcaModel,
    RegressorKind,
    ShapeError,
    Split,
    Surrogate,
    TheoryReport,
    UsageError,
    check_encoder_lipschitz,
    check_fan,
    check_mc_covariance_rate,
    fit_pca,
    fit_surrogate,
    generate_dataset,
    l2_norm,
    load_surrogate,
    read_dataset,
    resample,
    sample_mu_b,
    sample_mu_g,
    sample_mu_l,
    sample_mu_p,
    solve_burgers,
    solve_darcy,
    solve_poisson,
    stechkin_slope,
    subsample_dataset,
    write_dataset,
)

__version__ = "0.1.0"
