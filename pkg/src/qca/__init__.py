"""Weyl, Dirac and Maxwell quantum cellular automata.

Exact discrete-time evolution of single-particle states, spectral analysis,
the narrowband dispersive approximation, zitterbewegung, step-barrier
scattering, Maxwell-mode phenomenology and dispersion-preserving boosts.
"""

from qca.automata import (
    AutomatonSpec,
    Model,
    NVector,
    dirac_coin,
    n_vector,
    weyl_coin,
)

__version__ = "0.1.0"

__all__ = [
    "AutomatonSpec",
    "Model",
    "NVector",
    "dirac_coin",
    "n_vector",
    "weyl_coin",
    "__version__",
]
