"""Orbital dynamics on a rotationally invariant noncommutative phase space:
effective-Hamiltonian propagation, perihelion-precession measurement, and
observational bounds on the noncommutativity strengths.
"""

__version__ = "0.1.0"

from .analytic import (
    ParticleSpec,
    composite_params,
    minimal_momentum,
    nc_from_constants,
    perihelion_shift,
    perihelion_shift_massless,
    rescale_params,
    scaling_constants,
)
from .bounds import (
    BoundReport,
    ObservationRecord,
    bound_eta,
    bound_theta,
    default_observation,
    load_observation,
    particle_bounds,
    residual_cap,
    run_pipeline,
)
from .core import (
    NCParams,
    OrbitElements,
    PhaseState,
    PhysicalConstants,
    UnitScales,
    kepler_state_at_perihelion,
    nondimensionalize,
    vec3,
)
from .dynamics import (
    Derivatives,
    angular_momentum,
    effective_hamiltonian,
    equations_of_motion,
    hamilton_vector,
    precession_rate,
)
from .integrator import (
    PrecessionMeasurement,
    Trajectory,
    detect_perihelion_passages,
    integrate_orbit,
    measure_precession,
)

__all__ = [
    "__version__",
    "ParticleSpec",
    "composite_params",
    "minimal_momentum",
    "nc_from_constants",
    "perihelion_shift",
    "perihelion_shift_massless",
    "rescale_params",
    "scaling_constants",
    "BoundReport",
    "ObservationRecord",
    "bound_eta",
    "bound_theta",
    "default_observation",
    "load_observation",
    "particle_bounds",
    "residual_cap",
    "run_pipeline",
    "NCParams",
    "OrbitElements",
    "PhaseState",
    "PhysicalConstants",
    "UnitScales",
    "kepler_state_at_perihelion",
    "nondimensionalize",
    "vec3",
    "Derivatives",
    "angular_momentum",
    "effective_hamiltonian",
    "equations_of_motion",
    "hamilton_vector",
    "precession_rate",
    "PrecessionMeasurement",
    "Trajectory",
    "detect_perihelion_passages",
    "integrate_orbit",
    "measure_precession",
]
