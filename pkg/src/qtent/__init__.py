"""Gate-level simulation of the quantum tent map under gate imperfections."""

from .circuit import TentMapParams, build_map_sequence, gate_count, iterate
from .classical import ClassicalMap
from .fidelity import FidelityTrace, fit_timescales, run_ensemble, run_fidelity, scaling_collapse
from .husimi import CoherentSpec, circle_state, coherent_state
from .imperfections import NoiseConfig, StaticDisorder, sample_static_disorder
from .statevec import GateError, StateVector
from .theory import TheoryParams, chi, delta_chi

__all__ = [
    "ClassicalMap",
    "CoherentSpec",
    "FidelityTrace",
    "GateError",
    "NoiseConfig",
    "StateVector",
    "StaticDisorder",
    "TentMapParams",
    "TheoryParams",
    "build_map_sequence",
    "chi",
    "circle_state",
    "coherent_state",
    "delta_chi",
    "fit_timescales",
    "gate_count",
    "iterate",
    "run_ensemble",
    "run_fidelity",
    "sample_static_disorder",
    "scaling_collapse",
]
