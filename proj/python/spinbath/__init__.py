"""Classical spin bath coupled to a quantum subsystem: adiabatic frames,
coupling tensors, geometric phases and trajectory ensembles."""

from ._core import (
    __version__,
    ConfigError,
    DegeneracyError,
    SpinbathError,
    bath_energy,
    coupling_diagonal,
    coupling_offdiagonal,
    cone_loop,
    eigendecompose,
    h_of_s,
    invariant_checks,
    precess,
    qubit_dephasing,
    qubit_isotropic,
    sample_initial,
    simulate,
)

__all__ = [
    "__version__",
    "ConfigError",
    "DegeneracyError",
    "SpinbathError",
    "bath_energy",
    "coupling_diagonal",
    "coupling_offdiagonal",
    "cone_loop",
    "eigendecompose",
    "h_of_s",
    "invariant_checks",
    "precess",
    "qubit_dephasing",
    "qubit_isotropic",
    "sample_initial",
    "simulate",
]
