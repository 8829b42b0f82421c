"""Entanglement certification with rotationally covariant (RoC) polarization measurements."""
from .certify import CertStatus, CertificationResult, ConfidenceSettings, certify, hoeffding_radius, min_negativity
from .povm import AngleBin, AnglePartition, BinnedPOVM, RoCDevice, build_binned_povm, estimate_contrast
from .qubit import DensityMatrix, negativity, partial_transpose
from .states import MeasurementRecord, NamedState, joint_density, joint_probabilities, make_state, sample_record

__version__ = "0.1.0"

__all__ = [
    "AngleBin", "AnglePartition", "BinnedPOVM", "CertStatus", "CertificationResult", "ConfidenceSettings",
    "DensityMatrix", "MeasurementRecord", "NamedState", "RoCDevice", "build_binned_povm", "certify",
    "estimate_contrast", "hoeffding_radius", "joint_density", "joint_probabilities", "make_state",
    "min_negativity", "negativity", "partial_transpose", "sample_record",
]
