import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ncorbit.analytic import perihelion_shift
from ncorbit.core import (
    NCParams,
    OrbitElements,
    PhaseState,
    PhysicalConstants,
    kepler_state_at_perihelion,
    nondimensionalize,
    vec3,
)
from ncorbit.errors import ValidationError

MERCURY = OrbitElements(a=5.7909e10, e=0.20563, k=6.67430e-11 * 1.98892e30, m=3.3011e23)


class TestVec3:
    def test_basic(self):
        v = vec3(1.0, 2.0, 3.0)
        assert v.dtype == np.float64
        assert v.tolist() == [1.0, 2.0, 3.0]

    @pytest.mark.parametrize("bad", [math.nan, math.inf, -math.inf])
    def test_rejects_nonfinite(self, bad):
        with pytest.raises(ValidationError):
            vec3(1.0, bad, 0.0)


class TestPhysicalConstants:
    def test_defaults_positive(self):
        c = PhysicalConstants.default()
        assert c.G == 6.67430e-11
        assert c.hbar == 1.054571817e-34
        assert c.planck_length == 1.616255e-35
        assert c.solar_mass > 0 and c.electron_mass > 0 and c.nucleon_mass > 0

    def test_override_file(self, tmp_path):
        f = tmp_path / "c.txt"
        f.write_text("G = 7e-11\n")
        c = PhysicalConstants.from_file(f)
        assert c.G == 7e-11
        assert c.hbar == PhysicalConstants.default().hbar

    def test_unknown_key_rejected(self, tmp_path):
        f = tmp_path / "c.txt"
        f.write_text("gravity = 7e-11\n")
        with pytest.raises(ValidationError, match="gravity"):
            PhysicalConstants.from_file(f)

    def test_nonpositive_rejected(self):
        with pytest.raises(ValidationError):
            PhysicalConstants(G=0.0, hbar=1.0, planck_length=1.0,
                              solar_mass=1.0, electron_mass=1.0, nucleon_mass=1.0)


class TestNCParams:
    def test_invariants(self):
        nc = NCParams(theta_sq=4.0, eta_sq=9.0, mass=3.0)
        assert nc.theta_invariant == 36.0
        assert nc.eta_invariant == 1.0

    @pytest.mark.parametrize("kw", [
        dict(theta_sq=-1.0, eta_sq=0.0, mass=1.0),
        dict(theta_sq=0.0, eta_sq=-1.0, mass=1.0),
        dict(theta_sq=0.0, eta_sq=0.0, mass=0.0),
    ])
    def test_validation(self, kw):
        with pytest.raises(ValidationError):
            NCParams(**kw)


class TestOrbitElements:
    @pytest.mark.parametrize("kw,name", [
        (dict(a=0.0, e=0.1, k=1.0, m=1.0), "a"),
        (dict(a=1.0, e=1.0, k=1.0, m=1.0), "e"),
        (dict(a=1.0, e=1.2, k=1.0, m=1.0), "e"),
        (dict(a=1.0, e=-0.1, k=1.0, m=1.0), "e"),
        (dict(a=1.0, e=0.1, k=-1.0, m=1.0), "k"),
        (dict(a=1.0, e=0.1, k=1.0, m=0.0), "m"),
    ])
    def test_validation_names_field(self, kw, name):
        with pytest.raises(ValidationError, match=f"'{name}'"):
            OrbitElements(**kw)

    def test_period(self):
        elem = OrbitElements(a=1.0, e=0.2, k=1.0, m=1.0)
        assert elem.period == pytest.approx(2.0 * math.pi, rel=1e-15)


class TestPhaseState:
    def test_rejects_origin(self):
        with pytest.raises(ValidationError):
            PhaseState(x=np.zeros(3), p=np.ones(3))

    def test_arrays_read_only(self):
        s = PhaseState(x=vec3(1, 0, 0), p=vec3(0, 1, 0))
        with pytest.raises(ValueError):
            s.x[0] = 2.0

    def test_flat_vector(self):
        s = PhaseState(x=vec3(1, 2, 3), p=vec3(4, 5, 6))
        assert s.y.tolist() == [1, 2, 3, 4, 5, 6]


class TestNondimensionalize:
    def test_identity_when_scaled(self):
        elem = OrbitElements(a=1.0, e=0.3, k=1.0, m=1.0)
        nc = NCParams(2.0, 3.0, 1.0)
        selem, snc, scales = nondimensionalize(elem, nc)
        assert scales.length == scales.time == scales.mass == 1.0
        assert (selem.a, selem.k, selem.m, selem.e) == (1.0, 1.0, 1.0, 0.3)
        assert snc.theta_sq == 2.0 and snc.eta_sq == 3.0

    def test_zero_nc_stays_zero(self):
        _, snc, _ = nondimensionalize(MERCURY, NCParams.zero(MERCURY.m))
        assert snc.theta_sq == 0.0 and snc.eta_sq == 0.0

    def test_mercury_shift_invariant_under_scaling(self):
        # the closed-form shift is dimensionless, so evaluating it in scaled
        # units must reproduce the SI evaluation
        nc = NCParams(theta_sq=4.7e-46, eta_sq=3.0e24, mass=MERCURY.m)
        selem, snc, _ = nondimensionalize(MERCURY, nc)
        si = perihelion_shift(MERCURY, nc)
        scaled = perihelion_shift(selem, snc)
        assert scaled == pytest.approx(si, rel=1e-12)

    @settings(max_examples=50, deadline=None)
    @given(
        a=st.floats(1e3, 1e12),
        e=st.floats(0.0, 0.9),
        k=st.floats(1e10, 1e22),
        m=st.floats(1e-5, 1e25),
    )
    def test_state_round_trip(self, a, e, k, m):
        elem = OrbitElements(a=a, e=e, k=k, m=m)
        _, _, scales = nondimensionalize(elem, NCParams.zero(m))
        state = kepler_state_at_perihelion(elem)
        back = scales.unscale_state(scales.scale_state(state))
        np.testing.assert_allclose(back.x, state.x, rtol=1e-12)
        np.testing.assert_allclose(back.p, state.p, rtol=1e-12)


class TestKeplerStateAtPerihelion:
    def test_circular_unit(self):
        s = kepler_state_at_perihelion(OrbitElements(a=1.0, e=0.0, k=1.0, m=1.0))
        np.testing.assert_allclose(s.x, [1.0, 0.0, 0.0])
        np.testing.assert_allclose(s.p, [0.0, 1.0, 0.0])

    def test_vis_viva_e_half(self):
        s = kepler_state_at_perihelion(OrbitElements(a=1.0, e=0.5, k=1.0, m=1.0))
        assert np.linalg.norm(s.x) == pytest.approx(0.5)
        assert np.linalg.norm(s.p) == pytest.approx(math.sqrt(3.0), rel=1e-14)

    @settings(max_examples=50, deadline=None)
    @given(
        a=st.floats(0.1, 1e12),
        e=st.floats(0.0, 0.95),
        k=st.floats(1e-3, 1e21),
        m=st.floats(1e-6, 1e25),
    )
    def test_energy_and_angular_momentum(self, a, e, k, m):
        elem = OrbitElements(a=a, e=e, k=k, m=m)
        s = kepler_state_at_perihelion(elem)
        r = float(np.linalg.norm(s.x))
        energy = float(s.p @ s.p) / (2 * m) - m * k / r
        assert energy == pytest.approx(-m * k / (2 * a), rel=1e-14)
        l_mag = float(np.linalg.norm(np.cross(s.x, s.p)))
        assert l_mag == pytest.approx(m * math.sqrt(k * a * (1 - e * e)), rel=1e-13)
