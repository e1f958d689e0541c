"""Closed-form results: perihelion shift, mass-scaling laws, composite-body
effective parameters, and the minimal momentum."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

from .core import NCParams, OrbitElements
from .errors import InconsistentScalingError, ValidationError

__all__ = [
    "ParticleSpec",
    "nc_from_constants",
    "scaling_constants",
    "rescale_params",
    "composite_params",
    "perihelion_shift",
    "perihelion_shift_massless",
    "minimal_momentum",
]

# relative tolerance for the "same invariants across particles" precondition
SCALING_MATCH_RTOL = 1e-12


@dataclass(frozen=True)
class ParticleSpec:
    """A constituent particle: mass plus a report label."""

    mass: float
    label: str

    def __post_init__(self):
        if not (math.isfinite(self.mass) and self.mass > 0.0):
            raise ValidationError(f"particle mass must be > 0, got {self.mass}")


def nc_from_constants(
    c_theta: float, c_eta: float, planck_length: float, mass: float
) -> NCParams:
    """Strengths from the oscillator-construction constants.

    theta_sq = 3*c_theta^2 / (2*l_P^2) and likewise for eta; `mass` is the
    body the constants belong to (needed for the mass-invariant bookkeeping).
    """
    if not (math.isfinite(planck_length) and planck_length > 0.0):
        raise ValidationError(f"planck_length must be > 0, got {planck_length}")
    factor = 1.5 / (planck_length * planck_length)
    return NCParams(
        theta_sq=factor * c_theta * c_theta,
        eta_sq=factor * c_eta * c_eta,
        mass=mass,
    )


def scaling_constants(nc: NCParams) -> tuple[float, float]:
    """The mass-invariant pair (theta_sq*m^2, eta_sq/m^2)."""
    return nc.theta_invariant, nc.eta_invariant


def rescale_params(nc: NCParams, target_mass: float) -> NCParams:
    """Parameters of a body of different mass on the same phase space.

    Holds the invariants fixed: theta_sq' = theta_sq*(m/m')^2,
    eta_sq' = eta_sq*(m'/m)^2.  This is what the weak equivalence principle
    requires of bodies sharing one noncommutative background.
    """
    if not (math.isfinite(target_mass) and target_mass > 0.0):
        raise ValidationError(f"target mass must be > 0, got {target_mass}")
    ratio = nc.mass / target_mass
    return NCParams(
        theta_sq=nc.theta_sq * ratio * ratio,
        eta_sq=nc.eta_sq / (ratio * ratio),
        mass=target_mass,
    )


def _match(x: float, y: float) -> bool:
    return abs(x - y) <= SCALING_MATCH_RTOL * max(abs(x), abs(y))


def composite_params(
    particles: Iterable[tuple[ParticleSpec, NCParams]]
) -> NCParams:
    """Effective strengths for the center of mass of a composite body.

    Every constituent must carry the same mass-invariant pair; the composite
    of total mass M then has theta_sq = invariant_theta/M^2 and
    eta_sq = invariant_eta*M^2.  N identical particles therefore dilute the
    coordinate strength by N^2.
    """
    items = list(particles)
    if not items:
        raise ValidationError("composite_params requires at least one particle")
    inv_theta = inv_eta = None
    total_mass = 0.0
    for spec, nc in items:
        if not _match(nc.mass, spec.mass):
            raise InconsistentScalingError(
                f"particle '{spec.label}': NCParams attached to mass {nc.mass}, "
                f"spec mass {spec.mass}"
            )
        if inv_theta is None:
            inv_theta, inv_eta = nc.theta_invariant, nc.eta_invariant
        elif not (_match(nc.theta_invariant, inv_theta) and _match(nc.eta_invariant, inv_eta)):
            raise InconsistentScalingError(
                f"particle '{spec.label}' breaks the shared invariants: "
                f"({nc.theta_invariant}, {nc.eta_invariant}) vs ({inv_theta}, {inv_eta})"
            )
        total_mass += spec.mass
    return NCParams(
        theta_sq=inv_theta / (total_mass * total_mass),
        eta_sq=inv_eta * total_mass * total_mass,
        mass=total_mass,
    )


def perihelion_shift(elem: OrbitElements, nc: NCParams) -> float:
    """Perihelion shift per revolution, radians.

    theta_sq * pi*k*m^2*(4+e^2) / (8*a^3*(1-e^2)^3)
      - eta_sq * pi*a^3*sqrt(1-e^2) / (2*m^2*k)

    The coordinate term advances the perihelion, the momentum term makes it
    regress.  Uses elem.m; nc.mass plays no role here.
    """
    a, e, k, m = elem.a, elem.e, elem.k, elem.m
    one_me2 = 1.0 - e * e
    theta_term = nc.theta_sq * math.pi * k * m * m * (4.0 + e * e) / (
        8.0 * a**3 * one_me2**3
    )
    eta_term = nc.eta_sq * math.pi * a**3 * math.sqrt(one_me2) / (2.0 * m * m * k)
    return theta_term - eta_term


def perihelion_shift_massless(
    a: float, e: float, k: float, theta_invariant: float, eta_invariant: float
) -> float:
    """Shift per revolution in the mass-free form.

    With the invariants A = theta_sq*m^2, B = eta_sq/m^2 the orbiting mass
    drops out:  A*pi*k*(4+e^2)/(8*a^3*(1-e^2)^3) - B*pi*a^3*sqrt(1-e^2)/(2k).
    """
    if not (0.0 <= e < 1.0):
        raise ValidationError(f"eccentricity 'e' must satisfy 0 <= e < 1, got {e}")
    if not (a > 0.0 and k > 0.0):
        raise ValidationError("a and k must be > 0")
    one_me2 = 1.0 - e * e
    theta_term = theta_invariant * math.pi * k * (4.0 + e * e) / (8.0 * a**3 * one_me2**3)
    eta_term = eta_invariant * math.pi * a**3 * math.sqrt(one_me2) / (2.0 * k)
    return theta_term - eta_term


def minimal_momentum(eta_sq: float, hbar: float) -> float:
    """Smallest momentum scale implied by momentum noncommutativity:
    (3*hbar^2*eta_sq/2)^(1/4)."""
    if not (math.isfinite(eta_sq) and eta_sq >= 0.0):
        raise ValidationError(f"eta_sq must be >= 0, got {eta_sq}")
    return (1.5 * hbar * hbar * eta_sq) ** 0.25
