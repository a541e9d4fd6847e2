"""Perturbatively-perfect excitation transfer on 1D hopping chains.

The library computes single-particle spectra of sender--wire--receiver
chains, many-excitation transfer probabilities (determinants for fermions,
permanents for bosons), exact-integer resonance classification of wire
lengths, perturbative splitting analysis with transfer-time prediction,
magnetization/battery observables, and a brute-force Fock-space oracle
used to validate everything at small sizes.
"""

from .chain import ChainSpec, CouplingProfile, build_profile, adjacency_matrix
from .spectral import (
    SpectralDecomposition,
    diagonalize,
    decompose_chain,
    wire_spectrum,
    sender_spectrum,
)
from .amplitudes import (
    AmplitudeMatrix,
    TransferCurve,
    PeakReport,
    SubmatrixEvaluator,
    NumericalConsistencyError,
    amplitude,
    amplitude_matrix,
    sr_submatrix,
    fermion_prob,
    boson_prob,
    scan_transfer,
    plan_scan_grid,
    find_transfer_peak,
    scan_max_probability,
    single_particle_bound,
)
from .resonance import (
    Feasibility,
    ResonanceReport,
    resonant_pairs,
    resonance_count,
    pp_feasible,
    universal_lengths,
    resonance_report,
)
from .perturbation import (
    LevelCluster,
    RuleOfThumbResult,
    RatioEstimate,
    CommensurabilityVerdict,
    PerturbationReport,
    ClusterAmbiguityError,
    NoTransferPredicted,
    find_clusters,
    distinct_splittings,
    splitting_scaling,
    rule_of_thumb,
    predict_transfer_time,
    ratio_diagnostics,
    envelope_3ex,
    commensurability_check,
    perturbation_report,
)
from .oracle import (
    SectorBasis,
    enumerate_basis,
    build_sector_hamiltonian,
    oracle_transfer_prob,
    oracle_occupation,
)
from .observables import (
    BatteryReport,
    occupation,
    occupation_profile,
    magnetization_receiver,
    interaction_energy,
    switching_energy,
    battery_metrics,
)

__version__ = "0.1.0"

__all__ = [
    "ChainSpec",
    "CouplingProfile",
    "build_profile",
    "adjacency_matrix",
    "SpectralDecomposition",
    "diagonalize",
    "decompose_chain",
    "wire_spectrum",
    "sender_spectrum",
    "AmplitudeMatrix",
    "TransferCurve",
    "PeakReport",
    "SubmatrixEvaluator",
    "NumericalConsistencyError",
    "amplitude",
    "amplitude_matrix",
    "sr_submatrix",
    "fermion_prob",
    "boson_prob",
    "scan_transfer",
    "plan_scan_grid",
    "find_transfer_peak",
    "scan_max_probability",
    "single_particle_bound",
    "Feasibility",
    "ResonanceReport",
    "resonant_pairs",
    "resonance_count",
    "pp_feasible",
    "universal_lengths",
    "resonance_report",
    "LevelCluster",
    "RuleOfThumbResult",
    "RatioEstimate",
    "CommensurabilityVerdict",
    "PerturbationReport",
    "ClusterAmbiguityError",
    "NoTransferPredicted",
    "find_clusters",
    "distinct_splittings",
    "splitting_scaling",
    "rule_of_thumb",
    "predict_transfer_time",
    "ratio_diagnostics",
    "envelope_3ex",
    "commensurability_check",
    "perturbation_report",
    "SectorBasis",
    "enumerate_basis",
    "build_sector_hamiltonian",
    "oracle_transfer_prob",
    "oracle_occupation",
    "BatteryReport",
    "occupation",
    "occupation_profile",
    "magnetization_receiver",
    "interaction_energy",
    "switching_energy",
    "battery_metrics",
    "__version__",
]
