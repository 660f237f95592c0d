"""Named numeric failures. The CLI maps every one of them to exit code 1."""


class GibbsLDPError(Exception):
    """Base class for named numeric failures."""


class DerivativeVanishes(GibbsLDPError):
    pass


class RootFindingDiverged(GibbsLDPError):
    pass


class CapExceeded(GibbsLDPError):
    pass


class NonConvergence(GibbsLDPError):
    pass


class OutOfDomain(GibbsLDPError):
    pass


class OutOfRange(GibbsLDPError):
    """x lies outside the resolvable Lyapunov range; the rate there is +inf."""

    def __init__(self, x, lo=None, hi=None):
        self.x, self.lo, self.hi = x, lo, hi
        super().__init__(f"x={x!r} outside ({lo!r}, {hi!r})")


class DegenerateCurve(GibbsLDPError):
    """The pressure curve is affine, so the strictly convex branch is empty."""


class NegativeRate(GibbsLDPError):
    pass


class EmptyEvent(GibbsLDPError):
    pass
