"""Spectra of the one- and two-photon quantum Rabi models from G-function zeros."""

from ._rabi import (
    OnePhotonParams,
    RabiError,
    Root,
    ScanConfig,
    SpectrumResult,
    TwoPhotonParams,
    __version__,
    coupling_grid,
    default_cutoff,
    ed_eigenvalues,
    find_exceptional,
    find_falpha_zeros,
    find_spectrum,
    g_function,
    gscan,
    locate_exceptional_coupling,
    map_energy_to_x,
    map_x_to_energy,
    pole_locations,
    reconstruct_eigenstate,
    residual_norm,
    sectors,
    sweep,
    validate_roots,
)

__all__ = [
    "OnePhotonParams",
    "RabiError",
    "Root",
    "ScanConfig",
    "SpectrumResult",
    "TwoPhotonParams",
    "__version__",
    "coupling_grid",
    "default_cutoff",
    "ed_eigenvalues",
    "find_exceptional",
    "find_falpha_zeros",
    "find_spectrum",
    "g_function",
    "gscan",
    "locate_exceptional_coupling",
    "map_energy_to_x",
    "map_x_to_energy",
    "pole_locations",
    "reconstruct_eigenstate",
    "residual_norm",
    "sectors",
    "sweep",
    "validate_roots",
]
