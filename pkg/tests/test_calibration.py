import dataclasses

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from swgreen.calibration import calibrate_manning, rmse
from swgreen.config import parse_config, run
from swgreen.errors import ConfigError, SimulationAborted
from swgreen.output import HydrographSeries


def test_identical_series():
    s = HydrographSeries([0, 1, 2], [0.0, 0.3, 0.1])
    assert rmse(s, s) == 0.0


def test_constant_offset():
    t = np.linspace(0, 100, 11)
    q = np.sin(t / 20) ** 2
    assert rmse(HydrographSeries(t, q), np.column_stack([t, q + 0.125])) == pytest.approx(0.125, rel=1e-14)


def test_hand_interpolation():
    assert rmse([(0, 0), (10, 1)], [(5, 0.2)]) == pytest.approx(0.3, abs=1e-15)


def test_errors():
    with pytest.raises(ConfigError, match="empty"):
        rmse([(0, 0), (10, 1)], np.empty((0, 2)))
    with pytest.raises(ConfigError, match="outside"):
        rmse([(0, 0), (10, 1)], [(11, 0.0)])
    with pytest.raises(ConfigError):
        rmse([(0, 0), (10, 1)], [1, 2, 3])


obs_rows = st.lists(st.tuples(st.floats(0, 50), st.floats(-1, 1)), min_size=1, max_size=20)


@settings(max_examples=200, deadline=None)
@given(obs_rows, st.randoms(use_true_random=False))
def test_nonnegative_and_order_invariant(rows, rnd):
    sim = HydrographSeries(np.linspace(0, 50, 26), np.cos(np.linspace(0, 5, 26)))
    a = rmse(sim, rows)
    shuffled = list(rows)
    rnd.shuffle(shuffled)
    assert a >= 0
    assert rmse(sim, shuffled) == pytest.approx(a, rel=1e-12, abs=1e-300)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(0, 50), min_size=1, max_size=20))
def test_zero_iff_match(ts):
    sim = HydrographSeries(np.linspace(0, 50, 26), np.cos(np.linspace(0, 5, 26)))
    exact = [(t, float(np.interp(t, sim.t, sim.Q))) for t in ts]
    assert rmse(sim, exact) == 0.0
    exact[0] = (exact[0][0], exact[0][1] + 1e-6)
    assert rmse(sim, exact) > 0


SMALL_SLOPE = """\
mesh = rect
domain = 4 0.5
nx = 12
ny = 2
bottom = slope 0.04
boundary = east outflow
rain = 0 120 100mm/h
t_end = 120
output_every = 10
"""


@pytest.fixture(scope="module")
def small_slope():
    cfg = parse_config(SMALL_SLOPE)
    obs = run(dataclasses.replace(cfg, friction_n=0.3)).hydrograph
    return cfg, obs


def test_recovers_n_from_synthetic_observations(small_slope):
    cfg, obs = small_slope
    assert obs.Q[-1] > 0
    n_best, table = calibrate_manning(cfg, obs, [0.2, 0.3, 0.4])
    assert n_best == 0.3
    assert [n for n, _ in table] == [0.2, 0.3, 0.4]
    errs = dict(table)
    assert errs[0.3] == 0.0 and errs[0.2] > 0 and errs[0.4] > 0


def test_ties_go_to_smaller_n():
    flat = HydrographSeries([0.0, 10.0], [1.0, 1.0])
    n_best, table = calibrate_manning(parse_config(SMALL_SLOPE), [(5.0, 1.0)], [0.5, 0.1, 0.3],
                                      runner=lambda cfg: flat)
    assert n_best == 0.1 and len(table) == 3


def test_grid_validation():
    cfg = parse_config(SMALL_SLOPE)
    with pytest.raises(ConfigError):
        calibrate_manning(cfg, [(1, 0)], [])
    with pytest.raises(ConfigError):
        calibrate_manning(cfg, [(1, 0)], [0.1, 0.0])


def test_abort_names_the_coefficient():
    def runner(cfg):
        if cfg.friction_n == 0.2:
            raise SimulationAborted("blew up", t=3.0, cell=7)
        return HydrographSeries([0.0, 10.0], [0.0, 1.0])

    with pytest.raises(SimulationAborted, match="n = 0.2") as info:
        calibrate_manning(parse_config(SMALL_SLOPE), [(5.0, 0.5)], [0.1, 0.2], runner=runner)
    assert info.value.cell == 7


def test_runs_without_file_output(tmp_path):
    cfg = dataclasses.replace(parse_config(SMALL_SLOPE), outdir=tmp_path)
    seen = []

    def runner(c):
        seen.append(c)
        return HydrographSeries([0.0, 10.0], [0.0, 1.0])

    calibrate_manning(cfg, [(5.0, 0.5)], [0.1], runner=runner)
    assert seen[0].outdir is None and seen[0].friction_n == 0.1
