"""Exception hierarchy shared across the package."""


class BedsimError(Exception):
    """Base class for all package errors."""


class ConfigError(BedsimError):
    """A configuration value violates its declared constraints."""


class ValidationError(BedsimError):
    """A document or data structure failed validation."""


class NoContactError(BedsimError):
    """An operation that requires a non-empty support set got none."""


class NoBodyError(BedsimError):
    """A body profile with no occupied cells was supplied."""


class GateRejectedError(BedsimError):
    """Measured body weight falls outside the activation weight gate."""

    def __init__(self, weight_kgf: float, gate: tuple[float, float]):
        self.weight_kgf = weight_kgf
        self.gate = gate
        super().__init__(
            f"weight {weight_kgf:.2f} kgf outside activation gate "
            f"[{gate[0]:g}, {gate[1]:g}] kgf"
        )
