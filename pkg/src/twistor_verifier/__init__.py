"""Numerical and exact verification of twistor-space constructions.

Submodules
----------
matcore     complex structures on R^2n and the twistor-space geometry
retract     deformation retraction onto orthogonal structures
spheregeo   stereographic chart geometry of S^2n
acsfield    almost complex structure fields and integrability
twistorsec  twistor sections and their differentials
chartop     exact index arithmetic and the Morse analysis
checks      randomized sweeps used by the CLI
"""
from .matcore import (ComplexStructure, NotAComplexStructure, NotTangentError, StepTooLargeError,
                      TangentMatrix, make_standard_J0)
from .retract import RetractDecomposition, decompose, path, retract_to_orthogonal

__version__ = "0.1.0"

__all__ = [
    "ComplexStructure",
    "TangentMatrix",
    "NotAComplexStructure",
    "NotTangentError",
    "StepTooLargeError",
    "make_standard_J0",
    "RetractDecomposition",
    "decompose",
    "path",
    "retract_to_orthogonal",
]
