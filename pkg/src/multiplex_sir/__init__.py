"""Competing awareness and epidemic SIR spreading on two-layer networks."""

__version__ = "0.1.0"

from .analysis import (ThresholdQuery, ThresholdResult, epidemic_threshold,
                       immunization_threshold, spectral_radius, sweep_phase_diagram)
from .engine import (InitialCondition, JointState, JointStateDistribution, ModelParams,
                     SteadyStateSummary, mmca_step, run_to_steady_state)
from .errors import ConfigurationError, EdgeListParseError, KernelError, NonMonotoneError
from .immunization import ImmunizationPlan, apply_immunization
from .network import GraphSpec, Layer, MultiplexNetwork, build_multiplex, load_edge_list
from .stochastic import run_ensemble, simulate_realization

__all__ = [
    "ConfigurationError", "EdgeListParseError", "GraphSpec", "ImmunizationPlan",
    "InitialCondition", "JointState", "JointStateDistribution", "KernelError", "Layer",
    "ModelParams", "MultiplexNetwork", "NonMonotoneError", "SteadyStateSummary",
    "ThresholdQuery", "ThresholdResult", "apply_immunization", "build_multiplex",
    "epidemic_threshold", "immunization_threshold", "load_edge_list", "mmca_step",
    "run_ensemble", "run_to_steady_state", "simulate_realization", "spectral_radius",
    "sweep_phase_diagram",
]
