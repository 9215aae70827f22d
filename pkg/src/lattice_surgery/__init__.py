"""Stabilizer simulation of lattice surgery on small surface codes."""

__version__ = "0.1.0"

from .pauli import PauliString, parse, format_pauli, multiply, commutes
from .tableau import StabilizerTableau, MeasurementOutcome, ImpossibleOutcomeError, init_zero
from .codes import (
    StabilizerCode,
    code_A,
    code_B,
    merged_rough,
    merged_smooth,
    planar_surface_code,
    repetition_code_3,
    encode,
    syndromes,
    distance,
)
from .noise import NoiseModel, Executor
from .surgery import PROTOCOLS, protocol, run_protocol
from .experiment import ExperimentConfig, ExperimentResult, bell_fidelity, run

__all__ = [
    "PauliString",
    "parse",
    "format_pauli",
    "multiply",
    "commutes",
    "StabilizerTableau",
    "MeasurementOutcome",
    "ImpossibleOutcomeError",
    "init_zero",
    "StabilizerCode",
    "code_A",
    "code_B",
    "merged_rough",
    "merged_smooth",
    "planar_surface_code",
    "repetition_code_3",
    "encode",
    "syndromes",
    "distance",
    "NoiseModel",
    "Executor",
    "PROTOCOLS",
    "protocol",
    "run_protocol",
    "ExperimentConfig",
    "ExperimentResult",
    "bell_fidelity",
    "run",
    "__version__",
]
