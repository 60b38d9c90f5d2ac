"""Exception types shared across the package."""


class UnboundedOverlapError(ValueError):
    """Every lattice site overlaps (step ratio 0); the count must be capped by the grid extent."""


class ResolutionError(ValueError):
    """The requested geometry cannot be represented on the integer pixel grid."""


class ApertureResolutionError(ValueError):
    """The aperture spans too few reciprocal-space pixels to be sampled faithfully."""


class IntensityError(ValueError):
    """Calibrated intensities are too large to draw Poisson counts reliably."""


class DivergenceError(RuntimeError):
    """The iterative reconstruction produced non-finite values."""

    def __init__(self, iteration: int):
        super().__init__(f"non-finite values in object estimate at iteration {iteration}")
        self.iteration = iteration


class BundleFormatError(ValueError):
    """A dataset bundle or binary blob failed validation."""
