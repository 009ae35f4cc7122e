import math
from pathlib import Path

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from scfp.config import (ConfigError, build_problem, load_config, parse_config,
                         render_config, study_config)
from scfp.solvers import run

CONFIGS = Path(__file__).resolve().parent.parent / "configs"

MINIMAL = """\
[space1]
dim = 1

[space2]
dim = 2

[operator]
matrix = [[0.5], [0.3333333333333333]]

[maps.T]
kind = "scaling"
factor = 0.25

[maps.S]
kind = "box_projection"
lower = [0.0, -inf]
upper = [inf, 0.0]

[schedule]
gamma = "const:1"
alpha = "const:1/7"
theta = "const:1/5"

[init]
x0 = [6.0]
x1 = [6.0]
base_lower = [0.0]

[stop]
max_iter = 24
"""


def test_minimal_config_reproduces_first_iterate():
    tr = run(build_problem(parse_config(MINIMAL)))
    assert f"{tr.iterates()[2].coords[0]:.15f}" == "3.619047619047619"
    assert f"{tr.iterates()[25].coords[0]:.15f}" == "0.000000098252052"


def test_defaults_filled():
    cfg = parse_config(MINIMAL)
    assert cfg.space1["p"] == 2.0 and cfg.maps["variant"] == "banach"
    assert cfg.stop["step_tol"] == 0.0 and cfg.init["base_upper"] is None


@pytest.mark.parametrize("name", sorted(p.name for p in CONFIGS.glob("*.toml")))
def test_shipped_configs_load(name):
    problem = build_problem(load_config(CONFIGS / name))
    assert problem.stop.max_iter == 24


@pytest.mark.parametrize("extra, section", [
    ("[space1]\nbogus = 1\n", "space1"),
    ("[nonsense]\nx = 1\n", "nonsense"),
])
def test_unknown_keys_rejected(extra, section):
    text = MINIMAL.replace("[space1]\ndim = 1\n", extra + "dim = 1\n") \
        if section == "space1" else MINIMAL + extra
    with pytest.raises(ConfigError) as info:
        parse_config(text)
    assert info.value.line is not None
    line = text.splitlines()[info.value.line - 1]
    assert "bogus" in line or "nonsense" in line


def test_unknown_map_key():
    text = MINIMAL.replace('factor = 0.25', 'factor = 0.25\nfactr = 1')
    with pytest.raises(ConfigError, match="factr") as info:
        parse_config(text)
    assert "factr" in text.splitlines()[info.value.line - 1]


def test_alpha_outside_unit_interval():
    text = MINIMAL.replace('alpha = "const:1/7"', 'alpha = "const:1.5"')
    with pytest.raises(ConfigError, match=r"alpha_1 = 1\.5 is outside \(0, 1\)"):
        build_problem(parse_config(text))


def test_max_iter_zero():
    text = MINIMAL.replace("max_iter = 24", "max_iter = 0")
    with pytest.raises(ConfigError, match="max_iter") as info:
        parse_config(text)
    assert text.splitlines()[info.value.line - 1] == "max_iter = 0"


def test_syntax_error_has_line():
    with pytest.raises(ConfigError) as info:
        parse_config(MINIMAL.replace("dim = 2", "dim = = 2"))
    assert info.value.line == 5


def test_missing_required():
    with pytest.raises(ConfigError, match="x1"):
        parse_config(MINIMAL.replace("x1 = [6.0]\n", ""))


def test_bad_schedule_formula():
    with pytest.raises(ConfigError, match="schedule.gamma"):
        parse_config(MINIMAL.replace('"const:1"', '"linear:1"'))


def test_wrong_dimensions_is_config_error():
    with pytest.raises(ConfigError):
        build_problem(parse_config(MINIMAL.replace("x0 = [6.0]", "x0 = [6.0, 1.0]")))


def test_resolvent_and_equilibrium_maps_build():
    text = MINIMAL.replace('[maps.T]\nkind = "scaling"\nfactor = 0.25',
                           '[maps.T]\nkind = "identity"\n\n[maps.K]\nmatrix = [[1.0]]\n'
                           'shift = [0.0]\nmu = 1.0')
    text = text.replace('[maps.S]\nkind = "box_projection"',
                        '[maps.S]\nkind = "equilibrium"\nmatrix = [[0.0, 0.0], [0.0, 0.0]]\n'
                        'shift = [0.0, 0.0]\nr = 1.0')
    text = text.replace("[space1]", '[maps]\nvariant = "hilbert"\n\n[space1]')
    pb = build_problem(parse_config(text))
    assert pb.T.kind == "composed" and pb.S.kind == "equilibrium_resolvent"


def test_overrides():
    pb = build_problem(parse_config(MINIMAL), max_iter=3, step_tol=1e-4)
    assert pb.stop.max_iter == 3 and pb.stop.step_tol == 1e-4


floats = st.floats(-1e6, 1e6, allow_nan=False, allow_infinity=False)


@settings(max_examples=40, deadline=None)
@given(x0=floats, x1=floats, variant=st.sampled_from(["banach", "hilbert", "baseline_ma"]),
       case=st.one_of(st.none(), st.integers(1, 4)), max_iter=st.integers(1, 500),
       label=st.text(st.characters(blacklist_categories=("Cs",)), max_size=12))
def test_render_parse_round_trip(x0, x1, variant, case, max_iter, label):
    cfg = study_config(x0, x1, variant, case, max_iter, label)
    assert parse_config(render_config(cfg)) == cfg


def test_round_trip_keeps_infinities():
    cfg = parse_config(MINIMAL)
    again = parse_config(render_config(cfg))
    assert again == cfg and math.isinf(again.maps["S"]["upper"][0])
