"""Device-independent randomness certification toolkit.

Builds behaviors from explicit qubit strategies, bounds guessing
probabilities through moment-matrix semidefinite relaxations solved by an
in-package interior-point method, and verifies quantum bounds both
numerically and by exact sum-of-squares identities.
"""

__version__ = "0.1.0"

from .model import (
    Behavior,
    BellFunctional,
    GuessTarget,
    QubitMeasurement,
    Scenario,
    Setup,
    born_behavior,
    correlator,
    eval_functional,
    mix_visibility,
    validate_measurement,
)
from .presets import preset

__all__ = [
    "Behavior",
    "BellFunctional",
    "GuessTarget",
    "QubitMeasurement",
    "Scenario",
    "Setup",
    "born_behavior",
    "correlator",
    "eval_functional",
    "mix_visibility",
    "validate_measurement",
    "preset",
    "__version__",
]
