"""Exception types raised across the package."""


class RingmixError(Exception):
    """Base class for all package errors."""


class InvalidInstanceError(RingmixError, ValueError):
    """A perturbed-cycle instance (or its text form) is malformed."""


class ParameterError(RingmixError, ValueError):
    """Transition parameters violate p > q >= 0, a >= 0, p + q + a <= 1."""


class DimensionError(RingmixError, ValueError):
    """Vectors of incompatible length were combined."""


class ArityError(RingmixError, ValueError):
    """Too few arguments, or sequences that must pair up do not."""


class DomainError(RingmixError, ValueError):
    """An argument lies outside the domain where a formula is defined."""


class SizeGuardError(RingmixError, ValueError):
    """An enumeration would exceed the configured size guard."""


class RunawayError(RingmixError, RuntimeError):
    """A simulated walk exceeded its step budget."""


class NumericalDriftError(RingmixError, RuntimeError):
    """Probability mass drifted away from 1 during evolution."""


class NotMixedError(RingmixError, RuntimeError):
    """The chain did not reach the target distance within ``t_max`` steps.

    Attributes:
        t_max: the step budget that was exhausted.
        last_d: distance to stationarity at ``t_max``.
        profile: the partial :class:`~ringmix.mixing.MixingProfile`, if any.
    """

    def __init__(self, t_max, last_d, profile=None):
        super().__init__(f"not mixed by t_max={t_max} (last d={last_d:.6g})")
        self.t_max = t_max
        self.last_d = last_d
        self.profile = profile


class SchemaError(RingmixError):
    """A result store was written with an incompatible schema version."""


class CampaignError(RingmixError, RuntimeError):
    """A campaign produced no usable measurements."""
