"""Exception types shared across the package."""


class GeometryError(ValueError):
    """Invalid room geometry (non-positive dims, blocked voxel out of range)."""


class OutOfRoomError(ValueError):
    """A point lies outside the room, or inside a blocked voxel."""


class StabilityError(RuntimeError):
    """Requested timestep violates the solver stability bound and substepping is off."""


class SolverFault(RuntimeError):
    """Non-finite concentration detected; the step must abort."""


class ScenarioError(ValueError):
    """Scenario file failed to parse or validate. Message names the offending field."""


class InsufficientDataError(RuntimeError):
    """Not enough monitored samples to compute session metrics."""
