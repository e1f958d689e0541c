"""Shared domain types, physical constants, and unit scaling.

Positions, momenta, and angular momenta are plain float64 arrays of shape
(3,).  All heavy computation runs in the scaled unit system in which the
semi-major axis, the central strength G*M_central, and the orbiting mass are
all 1; SI values appear only at ingestion and reporting.  Mercury-scale SI
magnitudes (1e-57 ... 1e47) would otherwise wreck double-precision
conditioning in intermediate products.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources

import numpy as np

from .errors import ValidationError
from .kvfile import parse_kv_file, reject_unknown

__all__ = [
    "vec3",
    "PhysicalConstants",
    "NCParams",
    "OrbitElements",
    "PhaseState",
    "UnitScales",
    "nondimensionalize",
    "kepler_state_at_perihelion",
]


def vec3(x: float, y: float, z: float) -> np.ndarray:
    """Validated 3-vector; rejects NaN/Inf components."""
    v = np.array([x, y, z], dtype=np.float64)
    if not np.all(np.isfinite(v)):
        raise ValidationError(f"vector components must be finite, got {v}")
    return v


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=np.float64, copy=True)
    a.setflags(write=False)
    return a


_CONSTANT_KEYS = {
    "G",
    "hbar",
    "planck_length",
    "solar_mass",
    "electron_mass",
    "nucleon_mass",
}


@dataclass(frozen=True)
class PhysicalConstants:
    """SI constants used across the toolkit (CODATA 2018 / IAU values).

    Defaults ship in ``data/constants_default.txt`` and every field can be
    overridden from a flat key-value file (keys ``G``, ``hbar``,
    ``planck_length``, ``solar_mass``, ``electron_mass``, ``nucleon_mass``).
    """

    G: float               # m^3 / (kg s^2)
    hbar: float            # J s
    planck_length: float   # m
    solar_mass: float      # kg
    electron_mass: float   # kg
    nucleon_mass: float    # kg

    def __post_init__(self):
        for name in _CONSTANT_KEYS:
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0.0):
                raise ValidationError(
                    f"constant '{name}' must be strictly positive, got {value}"
                )

    @staticmethod
    def default() -> "PhysicalConstants":
        return _default_constants()

    @staticmethod
    def from_file(path) -> "PhysicalConstants":
        """Defaults overridden by any subset of keys found in `path`."""
        base = _default_constants()
        return base.with_overrides(path)

    def with_overrides(self, path) -> "PhysicalConstants":
        pairs = parse_kv_file(path)
        reject_unknown(pairs, _CONSTANT_KEYS, origin=str(path))
        merged = {name: getattr(self, name) for name in _CONSTANT_KEYS}
        for key, raw in pairs.items():
            try:
                merged[key] = float(raw)
            except ValueError as exc:
                raise ValidationError(
                    f"{path}: key '{key}' is not a number: {raw!r}"
                ) from exc
        return PhysicalConstants(**merged)

    def to_dict(self) -> dict[str, float]:
        return {name: getattr(self, name) for name in sorted(_CONSTANT_KEYS)}


@lru_cache(maxsize=1)
def _default_constants() -> PhysicalConstants:
    ref = resources.files("ncorbit").joinpath("data/constants_default.txt")
    with resources.as_file(ref) as path:
        pairs = parse_kv_file(path)
    reject_unknown(pairs, _CONSTANT_KEYS, origin="constants_default.txt")
    missing = _CONSTANT_KEYS - set(pairs)
    if missing:
        raise ValidationError(f"shipped constants file lacks keys {sorted(missing)}")
    return PhysicalConstants(**{k: float(v) for k, v in pairs.items()})


@dataclass(frozen=True)
class NCParams:
    """Rotationally averaged noncommutativity strengths attached to a mass.

    ``theta_sq`` is the coordinate-noncommutativity scalar (s^2/kg^2),
    ``eta_sq`` the momentum one (kg^2/s^2).  The combinations
    theta_sq*m^2 and eta_sq/m^2 are the mass-invariant constants shared by
    all bodies when the weak equivalence principle holds.
    """

    theta_sq: float
    eta_sq: float
    mass: float

    def __post_init__(self):
        if not (math.isfinite(self.theta_sq) and self.theta_sq >= 0.0):
            raise ValidationError(f"theta_sq must be >= 0, got {self.theta_sq}")
        if not (math.isfinite(self.eta_sq) and self.eta_sq >= 0.0):
            raise ValidationError(f"eta_sq must be >= 0, got {self.eta_sq}")
        if not (math.isfinite(self.mass) and self.mass > 0.0):
            raise ValidationError(f"mass must be > 0, got {self.mass}")
        if not (math.isfinite(self.theta_invariant) and math.isfinite(self.eta_invariant)):
            raise ValidationError("derived mass-invariant constants overflow")

    @property
    def theta_invariant(self) -> float:
        """theta_sq * mass^2: identical across bodies of different mass."""
        return self.theta_sq * self.mass * self.mass

    @property
    def eta_invariant(self) -> float:
        """eta_sq / mass^2: identical across bodies of different mass."""
        return self.eta_sq / (self.mass * self.mass)

    @staticmethod
    def zero(mass: float = 1.0) -> "NCParams":
        return NCParams(0.0, 0.0, mass)


@dataclass(frozen=True)
class OrbitElements:
    """Geometry of the reduced one-body problem.

    a: semi-major axis (m), e: eccentricity, k: central strength
    G*M_central (m^3/s^2), m: orbiting mass (kg).
    """

    a: float
    e: float
    k: float
    m: float

    def __post_init__(self):
        if not (math.isfinite(self.a) and self.a > 0.0):
            raise ValidationError(f"semi-major axis 'a' must be > 0, got {self.a}")
        if not (math.isfinite(self.e) and 0.0 <= self.e < 1.0):
            raise ValidationError(f"eccentricity 'e' must satisfy 0 <= e < 1, got {self.e}")
        if not (math.isfinite(self.k) and self.k > 0.0):
            raise ValidationError(f"central strength 'k' must be > 0, got {self.k}")
        if not (math.isfinite(self.m) and self.m > 0.0):
            raise ValidationError(f"orbiting mass 'm' must be > 0, got {self.m}")

    @property
    def period(self) -> float:
        """Kepler period 2*pi*sqrt(a^3/k)."""
        return 2.0 * math.pi * math.sqrt(self.a**3 / self.k)


@dataclass(frozen=True)
class PhaseState:
    """Instantaneous phase-space point (x, p, t) of the reduced problem."""

    x: np.ndarray   # position, m
    p: np.ndarray   # momentum, kg m/s
    t: float = 0.0

    def __post_init__(self):
        x = _readonly(self.x)
        p = _readonly(self.p)
        if x.shape != (3,) or p.shape != (3,):
            raise ValidationError("x and p must be 3-vectors")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(p)) and math.isfinite(self.t)):
            raise ValidationError("phase-space components must be finite")
        if float(x @ x) == 0.0:
            raise ValidationError("|x| must be > 0 (potential singular at origin)")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "p", p)

    @property
    def y(self) -> np.ndarray:
        """Flat (6,) phase vector [x, p] for the kernels."""
        return np.concatenate([self.x, self.p])


@dataclass(frozen=True)
class UnitScales:
    """Conversion factors between input units and the internal scaled system.

    A quantity in input units divided by the matching factor gives its
    scaled value; multiplying converts back.
    """

    length: float
    time: float
    mass: float

    @property
    def velocity(self) -> float:
        return self.length / self.time

    @property
    def momentum(self) -> float:
        return self.mass * self.length / self.time

    @property
    def energy(self) -> float:
        return self.mass * self.length**2 / self.time**2

    @property
    def angular_momentum(self) -> float:
        return self.mass * self.length**2 / self.time

    @property
    def theta_sq(self) -> float:
        """Unit carried by the coordinate strength (s^2/kg^2 -> scaled)."""
        return self.time**2 / self.mass**2

    @property
    def eta_sq(self) -> float:
        """Unit carried by the momentum strength (kg^2/s^2 -> scaled)."""
        return self.mass**2 / self.time**2

    def scale_state(self, state: PhaseState) -> PhaseState:
        return PhaseState(
            x=state.x / self.length,
            p=state.p / self.momentum,
            t=state.t / self.time,
        )

    def unscale_state(self, state: PhaseState) -> PhaseState:
        return PhaseState(
            x=state.x * self.length,
            p=state.p * self.momentum,
            t=state.t * self.time,
        )


def nondimensionalize(
    elements: OrbitElements, nc: NCParams
) -> tuple[OrbitElements, NCParams, UnitScales]:
    """Map to the unit system with a = k = m = 1.

    Length unit a, time unit sqrt(a^3/k), mass unit m.  Evaluating any
    downstream formula in the scaled system and converting back reproduces
    the input-unit result to better than 1e-12 relative.
    """
    scales = UnitScales(
        length=elements.a,
        time=math.sqrt(elements.a**3 / elements.k),
        mass=elements.m,
    )
    scaled_elements = OrbitElements(a=1.0, e=elements.e, k=1.0, m=1.0)
    scaled_nc = NCParams(
        theta_sq=nc.theta_sq / scales.theta_sq,
        eta_sq=nc.eta_sq / scales.eta_sq,
        mass=nc.mass / scales.mass,
    )
    return scaled_elements, scaled_nc, scales


def kepler_state_at_perihelion(elements: OrbitElements) -> PhaseState:
    """Unperturbed Kepler state at perihelion, orbit in the x-y plane.

    |x| = a(1-e) along +x, |p| = m*sqrt(k(1+e)/(a(1-e))) along +y, so the
    energy is -m*k/(2a) and |L| = m*sqrt(k*a*(1-e^2)).
    """
    a, e, k, m = elements.a, elements.e, elements.k, elements.m
    r = a * (1.0 - e)
    speed = math.sqrt(k * (1.0 + e) / r)
    return PhaseState(x=vec3(r, 0.0, 0.0), p=vec3(0.0, m * speed, 0.0), t=0.0)
