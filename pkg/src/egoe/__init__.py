"""Embedded two-body random matrix ensembles: strength functions, eigenvector
complexity across the Breit-Wigner to Gaussian crossover, and weak/strong
basis duality."""

from .ansatz import (
    AnsatzParams,
    StrengthFunctionFitter,
    ansatz_form,
    bw_form,
    bw_width_scan,
    fit_ansatz,
    gauss_form,
    predict_sinfo,
    predict_xi2,
)
from .duality import DualityScan, PowerLawScaling, ScalingFit, find_crossing, run_scan, scaling_fit
from .ensemble import (
    Hamiltonian,
    MeanField,
    SeedPolicy,
    TwoBodyMatrix,
    assemble,
    build_h1,
    default_mean_field,
    embed_two_body,
    make_member,
    sample_two_body,
)
from .fock import FockBasis, SpaceSpec, apply_pair_op, enumerate_basis
from .observables import (
    ObservableCurve,
    StrengthHistogram,
    curve_over_energy,
    dual_pair,
    info_entropy,
    participation_ratio,
    strength_function,
)
from .spectra import (
    SpectralDecomposition,
    SpectralStats,
    SpectralUnfolder,
    diagonalize,
    standardize,
    unfold,
    v_eigenbasis,
)

__version__ = "0.1.0"
