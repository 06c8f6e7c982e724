"""Alternating spectral/sign optimizer: kernels, theory calculators and FLOP model."""

from ._core import (
    ConvergenceError,
    InvalidArgument,
    LionMuon,
    alpha_ratio,
    config_reference,
    flops_report_json,
    hb_equivalent_lr,
    lmo,
    lr_multiplier,
    matmul_flops,
    matrix_norm,
    msign,
    newton_schulz,
    ns_flops,
    ns_share,
    optimizer_amortized_flops,
    phi_approx,
    phi_exact,
    run,
    scan_optimal_P,
    sign_elem,
    singular_values,
    theory_report_json,
    train_step_flops,
)

__all__ = [name for name in dir() if not name.startswith("_")]
