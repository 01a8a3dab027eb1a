"""Beam-splitter measurement of overlap, fidelity and purity of polarization qubits."""

__version__ = "0.1.0"

from .apparatus import ApparatusParams, effective_visibility  # noqa: E402
from .estimate import Estimate, OverlapEstimator  # noqa: E402
from .fit import Sin2Regressor, fit_sin2, phi_from_b  # noqa: E402
from .mcsim import CountRecord, CountSeries, Preparation, RngStream, run_measurement  # noqa: E402
from .qcore import (QubitDensity, PureQubit, mixed_state, overlap, pure_from_angles,  # noqa: E402
                    purity)

__all__ = [
    "ApparatusParams", "effective_visibility", "Estimate", "OverlapEstimator",
    "Sin2Regressor", "fit_sin2", "phi_from_b", "CountRecord", "CountSeries",
    "Preparation", "RngStream", "run_measurement", "QubitDensity", "PureQubit",
    "mixed_state", "overlap", "pure_from_angles", "purity",
]
