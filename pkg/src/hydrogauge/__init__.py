"""Gauge dependence of first-order transition probabilities in hydrogen-like atoms.

Hartree atomic units throughout (hbar = m = charge = 1, nuclear charge Z).
"""
from .basis import BasisSpec, HydrogenicBasis, QuantumNumbers, build_basis, energy, enumerate_states
from .errors import AccuracyError, ConfigurationError, DomainError, HydrogaugeError, PreconditionError
from .fields import GaugeChoice, GaugeFunction, builtin_gauge, gauge_transform, make_envelope, physical_fields
from .oracle import PropagationGrid, gauge_discrepancy_probe, propagate
from .perturbation import TimeQuadratureSpec, by_parts_amplitude, equivalence_report, first_order_amplitude

__version__ = "0.1.0"

__all__ = [
    "AccuracyError",
    "BasisSpec",
    "ConfigurationError",
    "DomainError",
    "GaugeChoice",
    "GaugeFunction",
    "HydrogaugeError",
    "HydrogenicBasis",
    "PreconditionError",
    "PropagationGrid",
    "QuantumNumbers",
    "TimeQuadratureSpec",
    "build_basis",
    "builtin_gauge",
    "by_parts_amplitude",
    "energy",
    "enumerate_states",
    "equivalence_report",
    "first_order_amplitude",
    "gauge_discrepancy_probe",
    "gauge_transform",
    "make_envelope",
    "physical_fields",
    "propagate",
]
