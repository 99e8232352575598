"""Spectral sequences for extensions of Hopf algebras over F_p."""
from .catalog import example
from .hopf import HopfAlgebra, Presentation, quotient_hopf, validate
from .specseq import ExtensionDatum, build_cess, build_filtss, build_mpass_e1, theta

__version__ = "0.1.0"

__all__ = ["HopfAlgebra", "Presentation", "ExtensionDatum", "example", "quotient_hopf", "validate",
           "build_cess", "build_filtss", "build_mpass_e1", "theta"]
