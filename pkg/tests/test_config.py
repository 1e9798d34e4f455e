import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from swgreen.config import (
    PRESET_NAMES,
    RunConfig,
    apply_overrides,
    basin_bottom,
    build_mesh,
    check_required,
    format_config,
    initial_field,
    load_config,
    parse_config,
    run,
    scenario_preset,
)
from swgreen.constants import CM_PER_H, MM_PER_H, OUTFLOW
from swgreen.errors import ConfigError
from swgreen.infiltration import SoilLayer, SoilModel, soil_preset
from swgreen.mesh import save_mesh

MINIMAL = "mesh = rect\ndomain = 2 1\nnx = 4\nny = 2\nt_end = 10\n"


def test_minimal_defaults():
    cfg = parse_config(MINIMAL)
    assert cfg.cfl == 0.25 and cfg.friction_n == 0.0 and cfg.soil is None
    assert cfg.rain == () and cfg.outdir is None
    assert cfg.output_times == [0.0, 10.0]


def test_rain_units():
    cfg = parse_config(MINIMAL + "rain = 0 300 500mm/h\n")
    assert cfg.rain == ((0.0, 300.0, 500 * MM_PER_H),)
    assert cfg.rain[0][2] == pytest.approx(1.3889e-4, rel=1e-4)
    cfg = parse_config(MINIMAL + "rain = 0 5min 1.5cm/h\n")
    assert cfg.rain == ((0.0, 300.0, 1.5 * CM_PER_H),)


def test_unit_factors_exact():
    assert CM_PER_H == 1 / 360000 and MM_PER_H == 1 / 3600000
    assert parse_config(MINIMAL + "rain = 0 1 1cm/h\n").rain[0][2] == 1 / 360000
    assert parse_config(MINIMAL + "rain = 0 1 1mm/h\n").rain[0][2] == 1 / 3600000


def test_soil_preset_by_name():
    cfg = parse_config(MINIMAL + "soil = silt_loam\n")
    layer = cfg.soil.upper
    assert (layer.psi, layer.dtheta) == (0.167, 0.340)
    assert layer.Ks == pytest.approx(1.8056e-6, rel=1e-4)


def test_explicit_layers():
    cfg = parse_config(MINIMAL + "soil = two_layer\nlayer1 = 1.09cm/h 11.01cm 0.247 1mm\n"
                                 "layer2 = 0.65cm/h 16.7cm 0.340\n")
    ref = soil_preset("two_layer")
    assert cfg.soil.d1 == pytest.approx(ref.d1, rel=1e-15)
    for got, want in ((cfg.soil.upper, ref.upper), (cfg.soil.lower, ref.lower)):
        for name in ("Ks", "psi", "dtheta"):
            assert getattr(got, name) == pytest.approx(getattr(want, name), rel=1e-15)


@pytest.mark.parametrize("extra, msg", [
    ("colour = red\n", "line 6: unknown key 'colour'"),
    ("rain = 0 10 1mm/h\nrain = 5 20 1mm/h\n", "line 7: rain: interval"),
    ("cfl = -1\n", "line 6: cfl: out of range"),
    ("manning = abc\n", "line 6: manning"),
    ("t_end = 5\n", "line 6: t_end: repeated"),
    ("boundary = up outflow\n", "line 6: boundary: unknown side"),
    ("soil = clay\n", "line 6: soil"),
    ("init_depth = -0.1\n", "line 6: init_depth"),
])
def test_errors_name_key_and_line(extra, msg):
    with pytest.raises(ConfigError, match=msg):
        parse_config(MINIMAL + extra)


def test_missing_required():
    with pytest.raises(ConfigError, match="t_end"):
        parse_config("mesh = rect\ndomain = 1 1\nnx = 1\nny = 1\n")
    with pytest.raises(ConfigError, match="nx"):
        parse_config("mesh = rect\ndomain = 1 1\nny = 1\nt_end = 1\n")


def test_presets_match_scenarios():
    assert scenario_preset("conservation_one_layer").initial_depth == 0.1
    assert scenario_preset("complex_basin").friction_n == 0.013
    s = scenario_preset("slope_runoff")
    assert s.domain_length == 21.945 and s.domain_width == 1.0 and s.friction_n == 0.48
    assert s.bottom == "slope" and s.bottom_params == (0.04,)
    b = scenario_preset("complex_basin")
    assert b.rain == ((0.0, 300.0, 500 * MM_PER_H),)
    assert b.soil.upper == SoilLayer(7 * MM_PER_H, 0.05, 0.125)
    assert scenario_preset("conservation_two_layer").soil.is_two_layer
    with pytest.raises(ConfigError):
        scenario_preset("nope")


def test_preset_meshes():
    m = build_mesh(scenario_preset("slope_runoff"))
    assert abs(m.total_area / m.n_cells / 3.9e-3 - 1) < 0.02
    assert np.allclose(m.edge_midpoint[m.edges_with_tag(OUTFLOW), 0], 21.945)
    m = build_mesh(scenario_preset("complex_basin"))
    assert 9500 <= m.n_cells <= 10500
    out = m.edges_with_tag(OUTFLOW)
    assert np.allclose(m.edge_midpoint[out, 1], 0.0) and len(out) > 0
    assert 2900 <= build_mesh(scenario_preset("lake_at_rest")).n_cells <= 3100
    m = build_mesh(scenario_preset("conservation_one_layer"))
    assert abs(m.total_area / m.n_cells / 6.3735e-4 - 1) < 0.01


def test_slope_preset_needs_rain():
    with pytest.raises(ConfigError, match="rain"):
        check_required("slope_runoff", scenario_preset("slope_runoff"))
    check_required("slope_runoff", apply_overrides(scenario_preset("slope_runoff"), ["rain=0 60 50mm/h"]))


def test_overrides():
    cfg = apply_overrides(scenario_preset("lake_at_rest"), ["t_end = 2min", "manning=0.02"])
    assert cfg.t_end == 120.0 and cfg.friction_n == 0.02
    with pytest.raises(ConfigError):
        apply_overrides(cfg, ["no_equals_sign"])


@pytest.mark.parametrize("name", PRESET_NAMES)
def test_preset_round_trip(name):
    cfg = scenario_preset(name)
    assert parse_config(format_config(cfg)) == cfg


layers = st.builds(SoilLayer, Ks=st.floats(1e-8, 1e-3), psi=st.floats(0, 1), dtheta=st.floats(0.01, 0.9))
soils = st.one_of(st.none(), layers.map(SoilModel.one_layer),
                  st.builds(SoilModel.two_layer, layers, layers, st.floats(1e-4, 1)))


@st.composite
def rain_schedules(draw):
    n = draw(st.integers(0, 3))
    edges = sorted(set(draw(st.lists(st.floats(0, 1e4), min_size=2 * n, max_size=2 * n))))
    out = []
    for a, b in zip(edges[::2], edges[1::2]):
        out.append((a, b, draw(st.floats(0, 1e-3))))
    return tuple(out)


bottoms = st.one_of(
    st.tuples(st.just("flat"), st.one_of(st.just(()), st.tuples(st.floats(-10, 10)))),
    st.tuples(st.just("slope"), st.tuples(st.floats(-1, 1))),
    st.tuples(st.just("plane"), st.tuples(st.floats(-10, 10), st.floats(-1, 1), st.floats(-1, 1))),
    st.tuples(st.just("basin"), st.just(())),
)


@st.composite
def configs(draw):
    bottom, params = draw(bottoms)
    return RunConfig(
        t_end=draw(st.floats(0, 1e5)),
        domain_length=draw(st.floats(0.1, 100)), domain_width=draw(st.floats(0.1, 100)),
        nx=draw(st.integers(1, 500)), ny=draw(st.integers(1, 500)),
        bottom=bottom, bottom_params=params,
        rain=draw(rain_schedules()), soil=draw(soils), friction_n=draw(st.floats(0, 1)),
        boundary=tuple(sorted(draw(st.dictionaries(st.sampled_from(["west", "east", "south", "north"]),
                                                     st.sampled_from(["wall", "outflow"]))).items())),
        cfl=draw(st.floats(0.01, 1)), h_eps=draw(st.floats(1e-9, 1e-3)),
        output_every=draw(st.one_of(st.none(), st.floats(0.1, 1000))),
    )


@settings(max_examples=150, deadline=None)
@given(configs())
def test_config_round_trip(cfg):
    text = format_config(cfg)
    again = parse_config(text)
    assert again == cfg
    assert format_config(again) == text


def test_file_mesh_and_fields(tmp_path):
    from swgreen.mesh import generate_rect_mesh
    m = generate_rect_mesh(2, 1, 4, 2, lambda x, y: 0.1 * x, boundary={"east": "OUTFLOW"})
    save_mesh(m, tmp_path / "m.node", tmp_path / "m.ele", tmp_path / "m.tags")
    np.savetxt(tmp_path / "h.txt", np.linspace(0, 0.1, m.n_cells))
    (tmp_path / "run.cfg").write_text("mesh = file m.node m.ele m.tags\ninit_depth = file h.txt\nt_end = 0\n")
    cfg = load_config(tmp_path / "run.cfg")
    mesh = build_mesh(cfg)
    np.testing.assert_array_equal(mesh.bottom, m.bottom)
    assert len(mesh.edges_with_tag(OUTFLOW)) == 2
    f = initial_field(cfg, mesh)
    np.testing.assert_allclose(f.depth(mesh), np.linspace(0, 0.1, m.n_cells), atol=1e-15)


def test_run_t_end_zero_echoes_initial_state(tmp_path):
    cfg = parse_config(MINIMAL.replace("t_end = 10", "t_end = 0") + "init_depth = 0.05\nbottom = basin\n"
                       f"outdir = {tmp_path}\n")
    res = run(cfg)
    assert res.simulation.n_steps == 0
    np.testing.assert_array_equal(res.field.w, res.mesh.cell_bottom + 0.05)
    assert [p.name for p in res.files] == ["field_00000.vtk", "ledger.csv"]


def test_run_hits_output_times():
    cfg = parse_config(MINIMAL + "init_depth = 0.02\nbottom = slope 0.05\nboundary = east outflow\n"
                                 "output_every = 0.25\nt_end = 1\n".replace("t_end = 1\n", ""))
    cfg = apply_overrides(cfg, ["t_end=1"])
    res = run(cfg)
    np.testing.assert_array_equal(res.hydrograph.t, [0, 0.25, 0.5, 0.75, 1.0])
    assert [r[0] for r in res.ledger_rows] == [0, 0.25, 0.5, 0.75, 1.0]


def test_basin_bottom_formula():
    x, y = 3.7, 6.1
    ref = 0.01 * y + 0.01 * abs(x - 0.5) - 0.01 * np.sin(np.pi * x / 2) - 0.01 * np.sin(np.pi * y / 2) + 1
    assert basin_bottom(x, y) == pytest.approx(ref, abs=1e-15)
