"""Exception hierarchy shared by all ncorbit modules."""


class NCOrbitError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(NCOrbitError):
    """Invalid input value or malformed configuration (CLI exit code 2)."""


class SingularOriginError(NCOrbitError):
    """Phase-space point too close to the force-center singularity."""


class DegenerateOrbitError(NCOrbitError):
    """Operation undefined for radial (L = 0) or circular (e = 0) orbits."""


class SingularityApproachError(NCOrbitError):
    """Propagated orbit fell inside the near-singular radius guard."""


class StepCollapseError(NCOrbitError):
    """Step controller demanded steps below the minimum step floor."""


class TooFewPassagesError(NCOrbitError):
    """Trajectory does not contain enough perihelion passages."""


class AmbiguousMinimumError(NCOrbitError):
    """Radial minima cannot be resolved (no variation or sparse sampling)."""


class PerturbativeRegimeError(NCOrbitError):
    """Noncommutative correction too large for the perturbative analysis."""


class InconsistentScalingError(NCOrbitError):
    """Particles do not share the mass-invariant noncommutativity constants."""
