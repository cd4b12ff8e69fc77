"""Shared exception types."""


class StructureError(ValueError):
    """Dimensions, shapes or coefficient algebras do not match."""


class ContractError(ValueError):
    """An operation precondition is violated (non-unitary input, non-flat connection, ...)."""


class SupportCapError(RuntimeError):
    """A frequency or group support grew past its configured cap."""


class TruncationError(RuntimeError):
    """A free-product word exceeded the configured length cap."""


class ScenarioError(ValueError):
    """A scenario file failed validation; `field` names the offending entry."""

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")
