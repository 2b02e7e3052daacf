"""Rate-distortion-equivocation tools for two-decoder source coding with private side information."""
from .model import (
    Alphabet,
    DistortionMeasure,
    DomainError,
    ErasedSourceParams,
    JointPMF,
    ConditionalPMF,
    RDEPoint,
    ValidationError,
    binary_entropy,
    conditional_entropy,
    entropy,
    hamming,
    make_erased_source,
    mutual_information,
)

__version__ = "0.1.0"

__all__ = [
    "Alphabet", "ConditionalPMF", "DistortionMeasure", "DomainError", "ErasedSourceParams",
    "JointPMF", "RDEPoint", "ValidationError", "binary_entropy", "conditional_entropy",
    "entropy", "hamming", "make_erased_source", "mutual_information",
]
