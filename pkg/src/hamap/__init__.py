"""Hardware-aware qubit mapping: calibration-weighted SWAP/Bridge routing."""

from .hardware import (
    CalibrationError,
    DistanceBundle,
    HardwareModel,
    build_distance_bundle,
    load_calibration,
    swap_error_edge,
    swap_time_edge,
)
from .qasm import Circuit, DependencyDag, GateNode, QasmError, build_dag, emit_qasm, parse_qasm
from .router import Mapping, RoutedCircuit, RouterConfig, RoutingError, route

__all__ = [
    "CalibrationError",
    "Circuit",
    "DependencyDag",
    "DistanceBundle",
    "GateNode",
    "HardwareModel",
    "Mapping",
    "QasmError",
    "RoutedCircuit",
    "RouterConfig",
    "RoutingError",
    "build_dag",
    "build_distance_bundle",
    "emit_qasm",
    "load_calibration",
    "parse_qasm",
    "route",
    "swap_error_edge",
    "swap_time_edge",
]
