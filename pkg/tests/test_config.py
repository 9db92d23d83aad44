import json
import math
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, strategies as st

from msqhr.config import (
    ConfigError,
    DesignConfig,
    RunConfig,
    dump_config,
    load_config,
    loads,
    parse_config,
    to_dict,
)
from msqhr.linkages import ExplicitLinkage, LadderLinkage, PolarizationAmplitudes, TwoLevelLinkage
from msqhr.two_state import DetuningSpec, PulseSpec

CONFIGS = Path(__file__).resolve().parent.parent / "configs"

J32_TEXT = """{
  "linkage": {
    "kind": "two_level",
    "J_lower": "3/2",
    "J_upper": "1/2",
    "polarization": {"plus": 8.5, "zero": 8.5, "minus": 8.5}
  },
  "pulse": {"shape": "sech", "window": [-20, 20]},
  "detuning": {"kind": "constant", "value": 80},
  "initial_state": [1, 0, 0, 0, 0, 0]
}"""


def test_j32_text_parses():
    cfg = loads(J32_TEXT)
    im = cfg.interaction()
    assert (im.N, im.M) == (4, 2)
    assert cfg.pulse.window == (-20.0, 20.0) and cfg.detuning.value == 80.0
    assert cfg.initial_vector(6).tolist() == [1, 0, 0, 0, 0, 0]


def test_shipped_configs_parse():
    paths = sorted(CONFIGS.glob("*.json"))
    assert paths
    for p in paths:
        if p.name.startswith("sweep"):
            continue
        cfg = load_config(p)
        im = cfg.interaction()
        cfg.initial_vector(im.N + im.M)


def test_defaults():
    cfg = parse_config({"linkage": {"kind": "explicit", "V": [[1], [2]]}})
    assert cfg.pulse == PulseSpec("sech", 1.0, (-20.0, 20.0))
    assert cfg.detuning.value == 0.0
    assert cfg.initial_vector(3).tolist() == [1, 0, 0]


def test_complex_pairs_and_numbers():
    cfg = parse_config({"linkage": {"kind": "explicit", "V": [[[1, 2], 3]]}, "initial_state": [[0, 1], 0, 0]})
    assert cfg.linkage.V.tolist() == [[1 + 2j, 3]]
    assert cfg.initial_vector(3).tolist() == [1j, 0, 0]


def test_subsystem():
    cfg = parse_config(
        {
            "linkage": {"kind": "two_level", "J_lower": 2, "J_upper": 1, "polarization": {"plus": 1, "minus": 1}},
            "subsystem": {"lower": [0, 2, 4], "upper": [0, 2]},
        }
    )
    im = cfg.interaction()
    assert im.lower_labels == ("-2", "0", "+2") and im.upper_labels == ("-1", "+1")


# errors: field- and line-anchored

def err(text):
    with pytest.raises(ConfigError) as e:
        loads(text)
    return e.value


def test_json_syntax_error_has_line():
    e = err('{\n  "linkage": {\n    "kind": "explicit",\n    "V": [[1]],,\n  }\n}')
    assert e.line == 4 and str(e).startswith("line 4")


@pytest.mark.parametrize(
    "mutate,field,line",
    [
        (lambda d: d.pop("linkage"), "linkage", None),
        (lambda d: d["linkage"].update(kind="three_level"), "linkage.kind", 3),
        (lambda d: d["linkage"].update(J_lower="1/3"), "linkage.J_lower", 4),
        (lambda d: d["linkage"]["polarization"].update(plus="big"), "linkage.polarization.plus", 6),
        (lambda d: d["linkage"]["polarization"].update(sigma=1), "linkage.polarization.sigma", 6),
        (lambda d: d["pulse"].update(shape="square"), "pulse", 8),
        (lambda d: d["pulse"].update(window=[5, -5]), "pulse", 8),
        (lambda d: d["pulse"].update(T=2), "pulse.T", 8),
        (lambda d: d["detuning"].update(kind="chirped"), "detuning.kind", 9),
        (lambda d: d["detuning"].update(value=None), "detuning.value", 9),
        (lambda d: d.update(initial_state=[1, 0, 0]), "initial_state", 10),
        (lambda d: d.update(initial_state=[1, 1, 0, 0, 0, 0]), "initial_state", 10),
        (lambda d: d.update(model="exact"), "model", None),
        (lambda d: d.update(extra=1), "extra", None),
    ],
)
def test_errors_name_field_and_line(mutate, field, line):
    d = json.loads(J32_TEXT)
    mutate(d)
    # keep the original layout so line numbers refer to the j32 text
    text = J32_TEXT if d == json.loads(J32_TEXT) else _relayout(d)
    e = err(text)
    assert e.field == field
    if line is not None:
        assert e.line == line
    assert field in str(e)


def _relayout(d):
    """Same layout as J32_TEXT: one top-level key per line, linkage keys on their own lines."""
    lk = d.get("linkage")
    lines = ["{"]
    parts = []
    if lk is not None:
        inner = ",\n".join(f"    {json.dumps(k)}: {json.dumps(v)}" for k, v in lk.items() if k != "polarization")
        if "polarization" in lk:
            inner += f',\n    "polarization": {json.dumps(lk["polarization"])}'
        parts.append('  "linkage": {\n' + inner + "\n  }")
    for k, v in d.items():
        if k != "linkage":
            parts.append(f"  {json.dumps(k)}: {json.dumps(v)}")
    return "\n".join(lines) + "\n" + ",\n".join(parts) + "\n}"


def test_relayout_matches_reference():
    assert _relayout(json.loads(J32_TEXT)).count("\n") == J32_TEXT.count("\n")
    assert json.loads(_relayout(json.loads(J32_TEXT))) == json.loads(J32_TEXT)


def test_explicit_errors():
    for v, field in [([], "linkage.V"), ([[1, 2], [3]], "linkage.V"), ([[1, [1, 2, 3]]], "linkage.V[0][1]")]:
        with pytest.raises(ConfigError) as e:
            parse_config({"linkage": {"kind": "explicit", "V": v}})
        assert e.value.field == field


def test_design_errors():
    base = {"linkage": {"kind": "explicit", "V": [[1]]}}
    for design, field in [
        ({"mode": "chirp", "targets": [1]}, "design.mode"),
        ({"mode": "far_off", "targets": []}, "design.targets"),
        ({"mode": "rosen_zener", "targets": [1], "l": 0}, "design.l"),
    ]:
        with pytest.raises(ConfigError) as e:
            parse_config({**base, "design": design})
        assert e.value.field == field


def test_subsystem_out_of_range():
    with pytest.raises(ConfigError) as e:
        parse_config({"linkage": {"kind": "explicit", "V": [[1], [2]]}, "subsystem": {"lower": [0, 5], "upper": [0]}})
    assert e.value.field == "subsystem"


def test_missing_file():
    with pytest.raises(ConfigError):
        load_config("/nonexistent/config.json")


# round trip

finite = st.floats(-1e6, 1e6, allow_nan=False, allow_infinity=False)
cplx = st.builds(complex, finite, finite)
pol = st.builds(PolarizationAmplitudes, cplx, cplx, cplx).filter(
    lambda p: any(abs(x) > 0 for x in (p.plus, p.zero, p.minus))
)
halves = st.integers(0, 6).map(lambda k: f"{k}/2" if k % 2 else str(k // 2))


@st.composite
def linkages(draw):
    kind = draw(st.sampled_from(["two_level", "ladder", "explicit"]))
    if kind == "two_level":
        jl = draw(halves)
        # J_upper must differ from J_lower by at most 1 and be reachable
        from fractions import Fraction

        j = Fraction(jl)
        options = [str(j + d) for d in (-1, 0, 1) if j + d >= 0 and not (j == 0 and j + d == 0)]
        return TwoLevelLinkage(jl, draw(st.sampled_from(options)), draw(pol))
    if kind == "ladder":
        return LadderLinkage(draw(pol), draw(pol))
    n, m = draw(st.integers(1, 4)), draw(st.integers(1, 3))
    return ExplicitLinkage(np.array(draw(st.lists(cplx, min_size=n * m, max_size=n * m))).reshape(n, m))


@st.composite
def configs(draw):
    link = draw(linkages())
    a = draw(st.floats(-100, 0, allow_nan=False))
    b = draw(st.floats(0.5, 100, allow_nan=False))
    pulse = PulseSpec(draw(st.sampled_from(["sech", "gaussian", "constant"])), 1.0, (a, a + b))
    det = DetuningSpec(draw(finite))
    design = None
    if draw(st.booleans()):
        design = DesignConfig(
            draw(st.sampled_from(["far_off", "rosen_zener"])),
            tuple(draw(st.lists(st.floats(0, 3), min_size=1, max_size=3))),
            draw(st.none() | st.floats(1, 200)),
            draw(st.integers(1, 4)),
            draw(st.none() | st.floats(0.1, 50)),
        )
    cfg = RunConfig(link, pulse, det, None, None, draw(st.none() | st.sampled_from(["far_off", "rosen_zener", "resonant"])), design)
    im = cfg.interaction()
    c0 = np.array(draw(st.lists(cplx, min_size=im.N + im.M, max_size=im.N + im.M)))
    if np.linalg.norm(c0) > 0 and draw(st.booleans()):
        c0 = c0 / np.linalg.norm(c0)
        if abs(np.linalg.norm(c0) - 1) <= 1e-12:
            cfg = RunConfig(link, pulse, det, c0, None, cfg.model, design)
    return cfg


@given(configs())
def test_round_trip_bit_exact(cfg):
    text = dump_config(cfg)
    back = loads(text)
    assert to_dict(back) == to_dict(cfg)
    assert dump_config(back) == text
    a, b = cfg.interaction().V, back.interaction().V
    assert np.array_equal(a, b)
    if cfg.initial_state is not None:
        assert np.array_equal(np.asarray(cfg.initial_state, dtype=complex), back.initial_state)
    assert back.pulse == cfg.pulse and back.detuning == cfg.detuning and back.design == cfg.design


@given(st.floats(allow_nan=False, allow_infinity=False))
def test_float_repr_is_exact(x):
    cfg = RunConfig(ExplicitLinkage(np.array([[1.0]])), detuning=DetuningSpec(x))
    assert loads(dump_config(cfg)).detuning.value == x


def test_17_digit_text_is_exact():
    x = 0.1 + 0.2
    text = json.dumps({"linkage": {"kind": "explicit", "V": [[1]]}, "detuning": {"value": float(f"{x:.17g}")}})
    assert loads(text).detuning.value == x
    assert math.isclose(x, 0.30000000000000004, rel_tol=0)
