"""Exception types shared across the simulator."""


class SliceSimError(Exception):
    """Base class for all simulator errors."""


class ConfigError(SliceSimError):
    """Invalid configuration (topology, traffic, run parameters)."""


class InsufficientResources(SliceSimError):
    """An allocation would drive a server or link below zero availability."""

    def __init__(self, kind, entity_id, needed, available):
        self.kind = kind  # "cpu" | "ram" | "bw"
        self.entity_id = entity_id
        self.needed = needed
        self.available = available
        super().__init__(
            f"insufficient {kind} on {'link' if kind == 'bw' else 'server'} "
            f"{entity_id}: need {needed}, have {available}"
        )


class DuplicateSlice(SliceSimError):
    """A slice id is already present in the allocation ledger."""


class UnknownSlice(SliceSimError):
    """Release of a slice id that is not in the allocation ledger."""


class UnknownNode(SliceSimError):
    """A node id that does not name a server (or does not exist)."""


class DimensionMismatch(SliceSimError):
    """Input vector length does not match the network layer it feeds."""


class NoFeasibleAction(SliceSimError):
    """Every action is masked out: no server can host the current VNF."""


class NonFiniteGradient(SliceSimError):
    """A parameter update produced NaN/inf gradients; the step was aborted."""


class NonMonotoneTime(SliceSimError):
    """A metrics record arrived with a timestamp earlier than the last one."""
