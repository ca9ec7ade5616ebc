"""Desk-scale simulation of Rydberg-blockaded atom arrays.

Library layout:

* :mod:`scarsim.lattice`     geometries, interactions, lifetime predictors
* :mod:`scarsim.hilbert`     blockade-constrained basis and microstate ordering
* :mod:`scarsim.hamiltonian` sparse operators and detuning drives
* :mod:`scarsim.evolve`      Krylov time evolution, entropies, dense oracle
* :mod:`scarsim.analysis`    fits, spectra, subharmonic weights
* :mod:`scarsim.floquet`     pulsed driving model and stroboscopic maps
* :mod:`scarsim.cli`         the ``scarsim`` command-line front end
"""

__version__ = "0.1.0"

from .lattice import (  # noqa: F401
    Lattice,
    PhysicalParams,
    blockade_radius,
    build_lattice,
    decay_predictors,
    interaction_matrix,
    optimal_detuning,
    predict_lifetime,
)
