"""Shared exception and warning types for the dkg2d package."""


class DkgError(Exception):
    """Base class for all dkg2d errors."""

    category = "DkgError"


class ConfigError(DkgError):
    """A run configuration is invalid (grid, masses, margins, strides)."""

    category = "ConfigError"


class ResonantMass(DkgError):
    """The mass pair sits on (or too close to) the resonance m = 2M, where
    the quadratic-correction coefficients do not exist."""

    category = "ResonantMass"


class BlowupDetected(DkgError):
    """A sup-norm crossed the blow-up guard; the run left the small-data
    regime the theory covers."""

    category = "BlowupDetected"

    def __init__(self, t, sup):
        super().__init__(f"sup-norm {sup:.3e} exceeded guard at t={t:.6g}")
        self.t = t
        self.sup = sup


class TailNotConverged(DkgError):
    """The defect at the end of the trajectory is still too large for the
    truncated scattering integral to be trusted."""

    category = "TailNotConverged"


class SnapshotIoError(DkgError):
    """A snapshot or trajectory file is missing, truncated, or malformed."""

    category = "IoError"


class BoundaryMassWarning(UserWarning):
    """A field carries non-negligible mass near the periodic seam, where
    coordinate-weighted diagnostics stop being meaningful."""
