"""Enumerations for pyresgen domain models."""

from enum import Enum


class GeneratorKind(Enum):
    """Architecture of a local residual generator.

    Attributes:
        NAIVE: Open-loop model copy, no error feedback
        LUENBERGER: Error feedback that also drives the communicated interaction estimate
        RETROFIT: Error feedback rectified so the communicated estimate is unaffected
    """

    NAIVE = "naive"
    LUENBERGER = "luenberger"
    RETROFIT = "retrofit"


class FilterKind(Enum):
    """Post-filter attached to each local residual.

    Attributes:
        NONE: Identity filter
        BESSEL: Second-order Bessel noise filter per residual channel
        ISOLATION: Unknown-input-observer isolation filter
        ISOLATION_BESSEL: Isolation filter followed by the Bessel filter
    """

    NONE = "none"
    BESSEL = "bessel"
    ISOLATION = "isolation"
    ISOLATION_BESSEL = "isolation+bessel"

    @property
    def uses_isolation(self) -> bool:
        """True if the filter contains the isolation stage."""
        return self in (FilterKind.ISOLATION, FilterKind.ISOLATION_BESSEL)

    @property
    def uses_bessel(self) -> bool:
        """True if the filter contains the Bessel stage."""
        return self in (FilterKind.BESSEL, FilterKind.ISOLATION_BESSEL)


class ComposeKind(Enum):
    """Ways of combining state-space systems.

    Attributes:
        SERIES: Output of each system feeds the next one
        PARALLEL: Shared input, summed outputs
        FEEDBACK: Negative feedback of the first system by the second
        BLOCK_DIAG: Stacked inputs and outputs, no coupling
    """

    SERIES = "series"
    PARALLEL = "parallel"
    FEEDBACK = "feedback"
    BLOCK_DIAG = "block_diag"


class EventKind(Enum):
    """Kind of a timeline event recorded during a scenario.

    Attributes:
        ATTACK: Attack injection starts
        ALARM: A local detector raised its alarm
        DISCONNECT: Subsystems were disconnected and their detectors separated
    """

    ATTACK = "attack"
    ALARM = "alarm"
    DISCONNECT = "disconnect"
