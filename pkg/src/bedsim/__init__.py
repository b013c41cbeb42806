"""Closed-loop simulator for a pressure-sensing, actuator-driven mattress
that equalizes the load on every body-contact point."""

from .control import ControlConfig, ControlState, activate, check_gate, compute_commands
from .grid import (
    BinaryMap,
    GridSpec,
    PressureMap,
    SupportSummary,
    binarize,
    pressed_count,
    summarize,
    total_weight,
    uniform_target,
)
from .morphology import (
    CROSS3,
    SQUARE3,
    FirmnessMode,
    StructuringElement,
    close,
    dilate,
    erode,
    open_,
    support_region,
)
from .plant import (
    ActuatorBank,
    BodyProfile,
    Direction,
    PlantConfig,
    SensorModel,
    get_profile,
    load_profile,
    read_sensors,
    solve_equilibrium,
    step_actuators,
)
from .sim import Simulation

__all__ = [
    "ActuatorBank",
    "BinaryMap",
    "BodyProfile",
    "CROSS3",
    "ControlConfig",
    "ControlState",
    "Direction",
    "FirmnessMode",
    "GridSpec",
    "PlantConfig",
    "PressureMap",
    "SQUARE3",
    "SensorModel",
    "Simulation",
    "StructuringElement",
    "SupportSummary",
    "activate",
    "binarize",
    "check_gate",
    "close",
    "compute_commands",
    "dilate",
    "erode",
    "get_profile",
    "load_profile",
    "open_",
    "pressed_count",
    "read_sensors",
    "solve_equilibrium",
    "step_actuators",
    "summarize",
    "support_region",
    "total_weight",
    "uniform_target",
]

__version__ = "0.1.0"
