import numpy as np
import pytest

from thermobeam import (
    ConfigError,
    GridConfig,
    PhysicalParameters,
    build_mesh,
    courant_advisory,
    lookup_preset,
)

UNIT = PhysicalParameters(rho1=1, rho2=1, rho3=1, k=1, b=1, delta=1, beta=1, tau=1)


class TestGridConfig:
    def test_reference_grid(self):
        cfg = GridConfig(I=26, T=35.0, c=0.05)
        assert cfg.h == pytest.approx(1.0 / 26.0, abs=0)
        assert cfg.kappa == pytest.approx(1.0 / 520.0, rel=1e-15)
        assert cfg.num_steps == 18200

    def test_small_grid_nodes(self):
        mesh = build_mesh(GridConfig(I=4, T=1.0, c=1.0))
        assert np.array_equal(mesh.nodes, [0.0, 0.25, 0.5, 0.75, 1.0])

    def test_below_minimum_subintervals(self):
        with pytest.raises(ConfigError, match="I"):
            GridConfig(I=3, T=1.0, c=1.0)

    @pytest.mark.parametrize("bad", [{"T": 0.0}, {"T": -1.0}, {"c": 0.0}, {"c": -0.5}])
    def test_nonpositive_rejected(self, bad):
        with pytest.raises(ConfigError):
            GridConfig(**{"I": 8, "T": 1.0, "c": 0.5, **bad})

    def test_run_shorter_than_one_step(self):
        with pytest.raises(ConfigError):
            GridConfig(I=4, T=0.01, c=1.0)  # kappa = 0.25 > T


class TestMesh:
    def test_endpoints_and_spacing(self):
        cfg = GridConfig(I=26, T=35.0, c=0.05)
        mesh = build_mesh(cfg)
        assert mesh.nodes[0] == 0.0 and mesh.nodes[-1] == 1.0
        gaps = np.diff(mesh.nodes)
        assert np.max(np.abs(gaps - cfg.h)) < 1e-14
        assert np.all(gaps > 0)

    def test_sizes(self):
        cfg = GridConfig(I=26, T=35.0, c=0.05)
        mesh = build_mesh(cfg)
        assert len(mesh.nodes) == 27
        assert len(mesh.times) == 18201
        assert len(mesh.interior) == 25

    def test_step_count_brackets_final_time(self):
        for I, T, c in ((26, 35.0, 0.05), (8, 1.0, 0.3), (16, 2.7, 0.11)):
            cfg = GridConfig(I=I, T=T, c=c)
            N = cfg.num_steps
            assert N * cfg.kappa <= T < (N + 1) * cfg.kappa

    def test_deterministic(self):
        cfg = GridConfig(I=26, T=35.0, c=0.05)
        a, b = build_mesh(cfg), build_mesh(cfg)
        assert np.array_equal(a.nodes, b.nodes)
        assert np.array_equal(a.times, b.times)

    def test_nodes_read_only(self):
        mesh = build_mesh(GridConfig(I=8, T=1.0, c=0.5))
        with pytest.raises(ValueError):
            mesh.nodes[0] = 7.0


class TestCourantAdvisory:
    def test_reference_scenario(self):
        # speeds: sqrt(2/2)=1, sqrt(1/2), sqrt(1/3); max is 1
        p = lookup_preset("mu_zero").parameters
        adv = courant_advisory(p, GridConfig(I=26, T=35.0, c=0.05))
        assert adv.max_wave_speed == pytest.approx(1.0, abs=1e-15)
        assert adv.speed_ratio == pytest.approx(0.05, abs=1e-15)
        assert not adv.warn

    def test_fast_stepping_flags_warning(self):
        adv = courant_advisory(UNIT, GridConfig(I=4, T=2.0, c=2.0))
        assert adv.speed_ratio == pytest.approx(2.0, abs=1e-15)
        assert adv.warn

    def test_vanishing_ratio_no_warning(self):
        adv = courant_advisory(UNIT, GridConfig(I=4, T=1.0, c=1e-9))
        assert adv.speed_ratio < 1e-8
        assert not adv.warn
