import json
import math

import numpy as np
import pytest

import ncorbit.verification
from ncorbit.cli import main
from ncorbit.core import PhysicalConstants

CONSTS = PhysicalConstants.default()

MERCURY_CFG = """
a_m = 5.7909e10
e = 0.20563
mass_kg = 3.3011e23
theta_sq = {theta_sq}
eta_sq = {eta_sq}
"""


def write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


class TestExitCodes:
    def test_shift_ok(self, tmp_path, capsys):
        cfg = write(tmp_path, "cfg.txt", MERCURY_CFG.format(theta_sq=0, eta_sq=0))
        assert main(["shift", "--config", cfg]) == 0
        out = capsys.readouterr().out
        assert "+0.000000000e+00" in out

    def test_invalid_eccentricity_names_field(self, tmp_path, capsys):
        cfg = write(tmp_path, "cfg.txt",
                    "a_m = 1\ne = 1.2\nmass_kg = 1\nk_m3s2 = 1\n")
        assert main(["shift", "--config", cfg]) == 2
        assert "'e'" in capsys.readouterr().err

    def test_unknown_key_names_key(self, tmp_path, capsys):
        cfg = write(tmp_path, "cfg.txt", "a_m = 1\nwarp_factor = 9\n")
        assert main(["shift", "--config", cfg]) == 2
        assert "warp_factor" in capsys.readouterr().err

    def test_missing_config(self, capsys):
        assert main(["shift"]) == 2
        assert "--config" in capsys.readouterr().err

    def test_bad_tolerance(self, tmp_path, capsys):
        cfg = write(tmp_path, "cfg.txt", MERCURY_CFG.format(theta_sq=0, eta_sq=0))
        assert main(["shift", "--config", cfg, "--tolerance", "1"]) == 2


class TestShift:
    def test_theta_bound_saturates_cap(self, tmp_path):
        theta_sq = (2.3e-57 / CONSTS.hbar) ** 2
        cfg = write(tmp_path, "cfg.txt", MERCURY_CFG.format(theta_sq=theta_sq, eta_sq=0))
        out = str(tmp_path / "shift.json")
        assert main(["shift", "--config", cfg, "--out", out, "--no-timestamp"]) == 0
        payload = json.loads((tmp_path / "shift.json").read_text())
        assert payload["total_rad_per_rev"] == pytest.approx(2 * math.pi * 1e-11, rel=0.05)
        assert payload["eta_term_rad_per_rev"] == 0.0

    def test_json_deterministic(self, tmp_path):
        cfg = write(tmp_path, "cfg.txt", MERCURY_CFG.format(theta_sq=1e-50, eta_sq=1e18))
        out1 = str(tmp_path / "a.json")
        out2 = str(tmp_path / "b.json")
        assert main(["shift", "--config", cfg, "--out", out1, "--no-timestamp"]) == 0
        assert main(["shift", "--config", cfg, "--out", out2, "--no-timestamp"]) == 0
        assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()

    def test_timestamp_present_by_default(self, tmp_path):
        cfg = write(tmp_path, "cfg.txt", MERCURY_CFG.format(theta_sq=0, eta_sq=0))
        out = str(tmp_path / "s.json")
        assert main(["shift", "--config", cfg, "--out", out]) == 0
        assert "generated_at_utc" in json.loads((tmp_path / "s.json").read_text())


class TestBounds:
    def test_paper_mode_reproduces_published_digits(self, tmp_path):
        out = str(tmp_path / "report.json")
        code = main(["bounds", "--rounding", "paper", "--out", out, "--no-timestamp"])
        assert code == 0
        payload = json.loads((tmp_path / "report.json").read_text())
        assert payload["residual_cap"] == 2 * math.pi * 1e-11
        assert payload["theta_bound_composite"] == pytest.approx(2.3e-57, rel=0.15)
        assert payload["eta_bound_composite"] == pytest.approx(1.8e-22, rel=0.15)
        ele = payload["per_particle"]["electron"]
        assert ele["theta_bound"] == pytest.approx(8.3e-4, rel=0.15)
        assert ele["eta_bound"] == pytest.approx(5.1e-76, rel=0.15)
        assert ele["p_min"] == pytest.approx(2.5e-38, rel=0.15)
        assert payload["per_particle"]["nucleon"]["eta_bound"] == pytest.approx(
            9.3e-73, rel=0.15
        )

    def test_malformed_observation_names_key(self, tmp_path, capsys):
        obs = write(tmp_path, "obs.txt",
                    "observed_arcsec_per_century = 42.9779\n"
                    "sigma_arcsec_per_century = 0.0009\n"
                    "gr_rad_per_rev = 5.0186e-7\n"
                    "revolutions_per_century = 415.2\n"
                    "a_m = 5.7909e10\n"
                    "e = 0.20563\n")
        assert main(["bounds", "--observation", obs]) == 2
        assert "mass_kg" in capsys.readouterr().err

    def test_zero_sigma_uses_central_residual(self, tmp_path):
        obs = write(tmp_path, "obs.txt",
                    "observed_arcsec_per_century = 42.9779\n"
                    "sigma_arcsec_per_century = 0\n"
                    "gr_rad_per_rev = 5.018656564997852e-07\n"
                    "revolutions_per_century = 415.2018557391525\n"
                    "a_m = 5.7909e10\n"
                    "e = 0.20563\n"
                    "mass_kg = 3.3011e23\n")
        out = str(tmp_path / "r.json")
        assert main(["bounds", "--observation", obs, "--out", out,
                     "--no-timestamp"]) == 0
        payload = json.loads((tmp_path / "r.json").read_text())
        # cap = |obs - GR| alone: 2*pi*0.00049e-8, recomputed by hand
        expected = 2 * math.pi * 0.00049e-8
        assert payload["residual_cap"] == pytest.approx(expected, rel=0.03)

    def test_constants_override_echoed(self, tmp_path):
        consts = write(tmp_path, "c.txt", "G = 6.0e-11\n")
        out = str(tmp_path / "r.json")
        assert main(["bounds", "--constants", consts, "--out", out,
                     "--no-timestamp"]) == 0
        payload = json.loads((tmp_path / "r.json").read_text())
        assert payload["inputs_echo"]["constants"]["G"] == 6.0e-11

    def test_bad_sigma_multiplier(self, capsys):
        assert main(["bounds", "--sigma-multiplier", "0"]) == 2


class TestVerify:
    def test_small_grid_passes(self, tmp_path, capsys):
        cfg = write(tmp_path, "v.txt",
                    "e_values = 0.2056\neps_values = 1e-5\nmodes = theta,eta\n"
                    "n_orbits = 20\n")
        out = str(tmp_path / "verify.csv")
        assert main(["verify", "--config", cfg, "--out", out]) == 0
        lines = (tmp_path / "verify.csv").read_text().strip().splitlines()
        assert lines[0].startswith("e,eps,mode,")
        assert len(lines) == 3
        assert all(line.endswith("pass") for line in lines[1:])

    def test_degenerate_eccentricity_is_skip_not_failure(self, tmp_path, capsys):
        cfg = write(tmp_path, "v.txt",
                    "e_values = 0.0\neps_values = 1e-5\nmodes = theta\n")
        assert main(["verify", "--config", cfg]) == 0
        assert "skip" in capsys.readouterr().out

    def test_injected_wrong_sign_fails(self, tmp_path, capsys, monkeypatch):
        import ncorbit.analytic

        monkeypatch.setattr(
            ncorbit.verification, "analytic_reference",
            lambda elem, nc: -ncorbit.analytic.perihelion_shift(elem, nc),
        )
        cfg = write(tmp_path, "v.txt",
                    "e_values = 0.2056\neps_values = 1e-5\nmodes = theta\n"
                    "n_orbits = 20\n")
        assert main(["verify", "--config", cfg]) == 1
        assert "FAIL" in capsys.readouterr().out

    def test_unknown_mode_rejected(self, tmp_path):
        cfg = write(tmp_path, "v.txt", "modes = sideways\n")
        assert main(["verify", "--config", cfg]) == 2

    def test_workers_match_serial(self, tmp_path):
        cfg_serial = write(tmp_path, "s.txt",
                           "e_values = 0.2056\neps_values = 1e-5,1e-4\n"
                           "modes = theta\nn_orbits = 15\nworkers = 1\n")
        cfg_pool = write(tmp_path, "p.txt",
                         "e_values = 0.2056\neps_values = 1e-5,1e-4\n"
                         "modes = theta\nn_orbits = 15\nworkers = 3\n")
        out1 = str(tmp_path / "serial.csv")
        out2 = str(tmp_path / "pool.csv")
        assert main(["verify", "--config", cfg_serial, "--out", out1]) == 0
        assert main(["verify", "--config", cfg_pool, "--out", out2]) == 0
        assert (tmp_path / "serial.csv").read_bytes() == (tmp_path / "pool.csv").read_bytes()


class TestSweep:
    BASE = ("a_m = 1\ne = 0.2056\nmass_kg = 1\nk_m3s2 = 1\n"
            "theta_sq = 4e-5\neta_sq = 1e-5\n")

    def test_single_point_matches_shift(self, tmp_path):
        cfg = write(tmp_path, "sw.txt",
                    self.BASE + "axis = e\nstart = 0.2056\nstop = 0.2056\ncount = 1\n")
        out = str(tmp_path / "sweep.csv")
        assert main(["sweep", "--config", cfg, "--out", out]) == 0
        rows = (tmp_path / "sweep.csv").read_text().strip().splitlines()
        assert len(rows) == 2
        value = float(rows[1].split(",")[1])

        from ncorbit.analytic import perihelion_shift
        from ncorbit.core import NCParams, OrbitElements

        expected = perihelion_shift(
            OrbitElements(1.0, 0.2056, 1.0, 1.0), NCParams(4e-5, 1e-5, 1.0)
        )
        assert value == pytest.approx(expected, rel=1e-15)

    def test_eccentricity_sweep_theta_monotone(self, tmp_path):
        cfg = write(tmp_path, "sw.txt",
                    "a_m = 1\ne = 0.1\nmass_kg = 1\nk_m3s2 = 1\n"
                    "theta_sq = 4e-5\neta_sq = 0\n"
                    "axis = e\nstart = 0.05\nstop = 0.8\ncount = 12\n")
        out = str(tmp_path / "sweep.csv")
        assert main(["sweep", "--config", cfg, "--out", out]) == 0
        rows = (tmp_path / "sweep.csv").read_text().strip().splitlines()[1:]
        shifts = [float(r.split(",")[1]) for r in rows]
        assert all(b > a for a, b in zip(shifts, shifts[1:]))

    def test_mass_sweep_constant_with_fixed_invariants(self, tmp_path):
        cfg = write(tmp_path, "sw.txt",
                    self.BASE + "axis = mass_kg\nstart = 1e-3\nstop = 1e3\n"
                    "count = 7\nspacing = log\n")
        out = str(tmp_path / "sweep.csv")
        assert main(["sweep", "--config", cfg, "--out", out]) == 0
        rows = (tmp_path / "sweep.csv").read_text().strip().splitlines()[1:]
        shifts = np.array([float(r.split(",")[1]) for r in rows])
        assert np.max(np.abs(shifts - shifts[0])) <= 1e-3 * abs(shifts[0])

    def test_empty_grid_rejected(self, tmp_path):
        cfg = write(tmp_path, "sw.txt",
                    self.BASE + "axis = e\nstart = 0.1\nstop = 0.5\ncount = 0\n")
        assert main(["sweep", "--config", cfg]) == 2

    def test_invalid_grid_point_rejected(self, tmp_path, capsys):
        cfg = write(tmp_path, "sw.txt",
                    self.BASE + "axis = e\nstart = 0.5\nstop = 1.5\ncount = 3\n")
        assert main(["sweep", "--config", cfg]) == 2
        assert "'e'" in capsys.readouterr().err

    def test_deterministic_output(self, tmp_path):
        cfg = write(tmp_path, "sw.txt",
                    self.BASE + "axis = theta_sq\nstart = 1e-6\nstop = 1e-4\ncount = 5\n")
        out1 = str(tmp_path / "a.csv")
        out2 = str(tmp_path / "b.csv")
        assert main(["sweep", "--config", cfg, "--out", out1]) == 0
        assert main(["sweep", "--config", cfg, "--out", out2]) == 0
        assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()

    def test_workers_match_serial(self, tmp_path):
        base = ("a_m = 1\ne = 0.2056\nmass_kg = 1\nk_m3s2 = 1\n"
                "theta_sq = 4e-5\neta_sq = 0\n"
                "axis = theta_sq\nstart = 2e-5\nstop = 4e-5\ncount = 3\n"
                "measure = 1\nn_orbits = 12\n")
        cfg_serial = write(tmp_path, "ser.txt", base + "workers = 1\n")
        cfg_pool = write(tmp_path, "par.txt", base + "workers = 3\n")
        out1 = str(tmp_path / "ser.csv")
        out2 = str(tmp_path / "par.csv")
        assert main(["sweep", "--config", cfg_serial, "--out", out1]) == 0
        assert main(["sweep", "--config", cfg_pool, "--out", out2]) == 0
        assert (tmp_path / "ser.csv").read_bytes() == (tmp_path / "par.csv").read_bytes()

    def test_measured_column(self, tmp_path):
        cfg = write(tmp_path, "sw.txt",
                    "a_m = 1\ne = 0.2056\nmass_kg = 1\nk_m3s2 = 1\n"
                    "theta_sq = 4e-5\neta_sq = 0\n"
                    "axis = theta_sq\nstart = 2e-5\nstop = 4e-5\ncount = 2\n"
                    "measure = 1\nn_orbits = 15\n")
        out = str(tmp_path / "sweep.csv")
        assert main(["sweep", "--config", cfg, "--out", out]) == 0
        rows = (tmp_path / "sweep.csv").read_text().strip().splitlines()
        assert rows[0] == "theta_sq,analytic_rad_per_rev,measured_rad_per_rev,rel_discrepancy"
        for row in rows[1:]:
            rel = float(row.split(",")[3])
            assert rel < 0.01


class TestSimulate:
    def test_writes_csv_with_expected_columns(self, tmp_path):
        cfg = write(tmp_path, "sim.txt",
                    "a_m = 1\ne = 0.2\nmass_kg = 1\nk_m3s2 = 1\n"
                    "theta_sq = 0\neta_sq = 0\nn_orbits = 1\n")
        out = str(tmp_path / "traj.csv")
        assert main(["simulate", "--config", cfg, "--out", out]) == 0
        lines = (tmp_path / "traj.csv").read_text().strip().splitlines()
        assert lines[0] == "t,x,y,z,px,py,pz,H,Lz"
        first = [float(v) for v in lines[1].split(",")]
        assert first[0] == 0.0
        assert first[1] == pytest.approx(0.8)          # perihelion radius
        assert first[7] == pytest.approx(-0.5)         # Kepler energy
        last = [float(v) for v in lines[-1].split(",")]
        assert last[7] == pytest.approx(first[7], rel=1e-10)
        assert last[8] == pytest.approx(first[8], rel=1e-10)
