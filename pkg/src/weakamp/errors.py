"""Exception types raised by weakamp."""


class WeakAmpError(Exception):
    """Base class for all errors raised by this package."""


class TailMassTooLarge(WeakAmpError, ValueError):
    """Fock truncation too small for the requested state."""


class DimensionMismatch(WeakAmpError, ValueError):
    pass


class ZeroVector(WeakAmpError, ValueError):
    pass


class TruncationLoss(WeakAmpError, ValueError):
    """A two-mode operation pushed amplitude outside the representable range."""


class GainOverflow(WeakAmpError, OverflowError):
    """g**N (or the weak-value equivalent) is not representable as a float."""


class VanishingOverlap(WeakAmpError, ValueError):
    """Post-selection orthogonal to the pre-selection; the weak value is undefined."""


class IncompletePOM(WeakAmpError, ValueError):
    pass


class WindowOutsideGrid(WeakAmpError, ValueError):
    pass


class OutsideWindow(WeakAmpError, ValueError):
    pass


class GainTooSmall(WeakAmpError, ValueError):
    """Gain below sqrt(2): two clones cannot be extracted."""


class ConfigError(WeakAmpError, ValueError):
    pass
