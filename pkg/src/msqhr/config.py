"""JSON run configurations for the command-line front end.

A configuration describes one linkage, the shared pulse, the detuning and
an initial state. All quantities are in scaled units (t/T, lambda T,
Delta T). Complex numbers are written either as plain numbers or as
``[re, im]`` pairs.

Example::

    {
      "linkage": {"kind": "two_level", "J_lower": "3/2", "J_upper": "1/2",
                  "polarization": {"plus": 8.5, "zero": 8.5, "minus": 8.5}},
      "pulse": {"shape": "sech", "window": [-20, 20]},
      "detuning": {"kind": "constant", "value": 80},
      "initial_state": [1, 0, 0, 0, 0, 0]
    }
"""

import json
import math
import re
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import ValidationError
from .linkages import (
    ExplicitLinkage,
    LadderLinkage,
    PolarizationAmplitudes,
    TwoLevelLinkage,
    build_linkage,
    half_integer,
)
from .two_state import DetuningSpec, PulseSpec

__all__ = ["ConfigError", "DesignConfig", "RunConfig", "load_config", "loads", "parse_config", "dump_config", "to_dict"]

SIMULATION_WINDOW = (-20.0, 20.0)
MODELS = ("resonant", "rosen_zener", "far_off")


class ConfigError(ValueError):
    """Malformed configuration; ``field`` is a dotted path, ``line`` a 1-based line or None."""

    def __init__(self, message, field=None, line=None):
        self.field = field
        self.line = line
        where = ""
        if field:
            where += f"{field}: "
        if line:
            where = f"line {line}: " + where
        super().__init__(where + message)


@dataclass(frozen=True)
class DesignConfig:
    mode: str
    targets: tuple
    Delta: float = None
    l: int = 1
    lambda_max: float = None


@dataclass(frozen=True)
class RunConfig:
    linkage: object
    pulse: PulseSpec = field(default_factory=lambda: PulseSpec("sech", 1.0, SIMULATION_WINDOW))
    detuning: DetuningSpec = field(default_factory=DetuningSpec)
    initial_state: np.ndarray = None
    subsystem: tuple = None
    model: str = None
    design: DesignConfig = None

    def interaction(self):
        im = build_linkage(self.linkage)
        if self.subsystem is not None:
            lower, upper = self.subsystem
            im = im.subsystem(lower, upper)
        return im

    def initial_vector(self, dim):
        """Initial amplitudes; the first lower state when none were given."""
        if self.initial_state is None:
            c0 = np.zeros(dim, dtype=complex)
            c0[0] = 1.0
            return c0
        c0 = np.asarray(self.initial_state, dtype=complex)
        if c0.shape != (dim,):
            raise ConfigError(f"expected {dim} amplitudes, got {c0.size}", "initial_state")
        n = np.linalg.norm(c0)
        if abs(n - 1.0) > 1e-12:
            raise ConfigError(f"initial state is not normalized (norm {n!r})", "initial_state")
        return c0


def _key_line(text, path):
    """Best-effort line number of ``path`` (dotted keys) within the JSON text.

    Each key is searched for after the previous one, so ``detuning.kind``
    finds the ``kind`` inside the detuning object rather than the first one.
    """
    if not text or not path:
        return None
    pos, line = 0, None
    for part in path.split("."):
        key = part.split("[")[0]
        m = re.compile(r'"' + re.escape(key) + r'"\s*:').search(text, pos)
        if not m:
            break
        pos = m.end()
        line = text.count("\n", 0, m.start()) + 1
    return line


class _Reader:
    def __init__(self, text=None):
        self.text = text

    def fail(self, msg, path):
        raise ConfigError(msg, path, _key_line(self.text, path))

    def obj(self, d, path):
        if not isinstance(d, dict):
            self.fail("expected an object", path)
        return d

    def get(self, d, key, path, default=..., kind=None):
        p = f"{path}.{key}" if path else key
        if key not in d:
            if default is ...:
                self.fail("missing required field", p)
            return default
        v = d[key]
        if kind == "number":
            return self.number(v, p)
        if kind == "str":
            if not isinstance(v, str):
                self.fail("expected a string", p)
        return v

    def number(self, v, path):
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            self.fail(f"expected a number, got {v!r}", path)
        v = float(v)
        if not math.isfinite(v):
            self.fail("must be finite", path)
        return v

    def complex(self, v, path):
        if isinstance(v, list):
            if len(v) != 2:
                self.fail("complex numbers are [re, im] pairs", path)
            return complex(self.number(v[0], path), self.number(v[1], path))
        return complex(self.number(v, path), 0.0)

    def check_keys(self, d, allowed, path):
        for k in d:
            if k not in allowed:
                self.fail(f"unknown field (allowed: {', '.join(sorted(allowed))})", f"{path}.{k}" if path else k)


def _polarization(r, d, path):
    r.obj(d, path)
    r.check_keys(d, {"plus", "zero", "minus"}, path)
    return PolarizationAmplitudes(*(r.complex(d.get(k, 0.0), f"{path}.{k}") for k in ("plus", "zero", "minus")))


def _angular_momentum(r, v, path):
    if isinstance(v, bool) or not isinstance(v, (str, int, float)):
        r.fail(f"expected a half-integer such as 1, 1.5 or \"3/2\", got {v!r}", path)
    try:
        return half_integer(v)
    except ValidationError as e:
        r.fail(str(e), path)


def _linkage(r, d):
    r.obj(d, "linkage")
    kind = r.get(d, "kind", "linkage", kind="str")
    try:
        if kind == "two_level":
            r.check_keys(d, {"kind", "J_lower", "J_upper", "polarization"}, "linkage")
            jl = _angular_momentum(r, r.get(d, "J_lower", "linkage"), "linkage.J_lower")
            ju = _angular_momentum(r, r.get(d, "J_upper", "linkage"), "linkage.J_upper")
            pol = _polarization(r, r.get(d, "polarization", "linkage"), "linkage.polarization")
            try:
                return TwoLevelLinkage(jl, ju, pol)
            except ValidationError as e:
                r.fail(str(e), "linkage.J_upper")
        if kind == "ladder_010":
            r.check_keys(d, {"kind", "first", "second"}, "linkage")
            return LadderLinkage(
                _polarization(r, r.get(d, "first", "linkage"), "linkage.first"),
                _polarization(r, r.get(d, "second", "linkage"), "linkage.second"),
            )
        if kind == "explicit":
            r.check_keys(d, {"kind", "V"}, "linkage")
            rows = r.get(d, "V", "linkage")
            if not isinstance(rows, list) or not rows or not all(isinstance(x, list) for x in rows):
                r.fail("expected a nonempty list of rows", "linkage.V")
            width = len(rows[0])
            if width == 0 or any(len(x) != width for x in rows):
                r.fail("rows must be nonempty and of equal length", "linkage.V")
            v = np.array(
                [[r.complex(x, f"linkage.V[{i}][{j}]") for j, x in enumerate(row)] for i, row in enumerate(rows)]
            )
            return ExplicitLinkage(v)
    except ValidationError as e:
        r.fail(str(e), "linkage")
    r.fail(f"unknown linkage kind {kind!r} (expected two_level, ladder_010 or explicit)", "linkage.kind")


def _pulse(r, d):
    if d is None:
        return PulseSpec("sech", 1.0, SIMULATION_WINDOW)
    r.obj(d, "pulse")
    r.check_keys(d, {"shape", "window", "T"}, "pulse")
    shape = r.get(d, "shape", "pulse", "sech", kind="str")
    T = r.get(d, "T", "pulse", 1.0, kind="number")
    if T != 1.0:
        r.fail("times are in units of T; T must be 1", "pulse.T")
    w = r.get(d, "window", "pulse", list(SIMULATION_WINDOW))
    if not isinstance(w, list) or len(w) != 2:
        r.fail("expected [t_start, t_end]", "pulse.window")
    w = (r.number(w[0], "pulse.window"), r.number(w[1], "pulse.window"))
    try:
        return PulseSpec(shape, 1.0, w)
    except ValidationError as e:
        r.fail(str(e), "pulse")


def _detuning(r, d):
    if d is None:
        return DetuningSpec()
    r.obj(d, "detuning")
    r.check_keys(d, {"kind", "value"}, "detuning")
    kind = r.get(d, "kind", "detuning", "constant", kind="str")
    if kind != "constant":
        r.fail(f"unsupported detuning kind {kind!r}", "detuning.kind")
    return DetuningSpec(r.get(d, "value", "detuning", 0.0, kind="number"), kind)


def _index_list(r, v, path):
    if not isinstance(v, list) or not v or not all(isinstance(i, int) and not isinstance(i, bool) and i >= 0 for i in v):
        r.fail("expected a nonempty list of nonnegative indices", path)
    return tuple(v)


def _design(r, d):
    r.obj(d, "design")
    r.check_keys(d, {"mode", "targets", "Delta", "l", "lambda_max"}, "design")
    mode = r.get(d, "mode", "design", kind="str")
    if mode not in ("rosen_zener", "far_off"):
        r.fail(f"unknown mode {mode!r}", "design.mode")
    t = r.get(d, "targets", "design")
    if not isinstance(t, list) or not t:
        r.fail("expected a nonempty list of phases", "design.targets")
    targets = tuple(r.number(x, "design.targets") for x in t)
    delta = r.get(d, "Delta", "design", None)
    lmax = r.get(d, "lambda_max", "design", None)
    l = r.get(d, "l", "design", 1)
    if not isinstance(l, int) or isinstance(l, bool) or l < 1:
        r.fail("l must be a positive integer", "design.l")
    return DesignConfig(
        mode,
        targets,
        None if delta is None else r.number(delta, "design.Delta"),
        l,
        None if lmax is None else r.number(lmax, "design.lambda_max"),
    )


def parse_config(data, text=None):
    """Build a :class:`RunConfig` from decoded JSON; ``text`` enables line numbers."""
    r = _Reader(text)
    r.obj(data, "")
    r.check_keys(data, {"linkage", "pulse", "detuning", "initial_state", "subsystem", "model", "design"}, "")
    linkage = _linkage(r, r.get(data, "linkage", ""))
    pulse = _pulse(r, data.get("pulse"))
    detuning = _detuning(r, data.get("detuning"))
    c0 = data.get("initial_state")
    if c0 is not None:
        if not isinstance(c0, list) or not c0:
            r.fail("expected a list of amplitudes", "initial_state")
        c0 = np.array([r.complex(x, f"initial_state[{i}]") for i, x in enumerate(c0)])
    sub = data.get("subsystem")
    if sub is not None:
        r.obj(sub, "subsystem")
        r.check_keys(sub, {"lower", "upper"}, "subsystem")
        sub = (
            _index_list(r, r.get(sub, "lower", "subsystem"), "subsystem.lower"),
            _index_list(r, r.get(sub, "upper", "subsystem"), "subsystem.upper"),
        )
    model = data.get("model")
    if model is not None and model not in MODELS:
        r.fail(f"unknown model {model!r} (expected one of {', '.join(MODELS)})", "model")
    design = _design(r, data["design"]) if "design" in data else None
    cfg = RunConfig(linkage, pulse, detuning, c0, sub, model, design)
    try:
        im = cfg.interaction()
    except (ValidationError, IndexError) as e:
        r.fail(str(e), "subsystem" if sub is not None else "linkage")
    if c0 is not None:
        try:
            cfg.initial_vector(im.N + im.M)
        except ConfigError as e:
            raise ConfigError(str(e).split(": ", 1)[-1], "initial_state", _key_line(text, "initial_state")) from None
    return cfg


def load_config(path):
    """Read and validate a JSON configuration file."""
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as e:
        raise ConfigError(f"cannot read {path}: {e.strerror}") from None
    return loads(text)


def loads(text):
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(e.msg, None, e.lineno) from None
    return parse_config(data, text)


def _cplx(z):
    z = complex(z)
    return [z.real, z.imag]


def _pol(p):
    return {"plus": _cplx(p.plus), "zero": _cplx(p.zero), "minus": _cplx(p.minus)}


def _jstr(j):
    j = Fraction(j)
    return str(j)


def to_dict(cfg):
    """Plain-JSON form of a configuration; inverse of :func:`parse_config`."""
    lk = cfg.linkage
    if isinstance(lk, TwoLevelLinkage):
        link = {"kind": "two_level", "J_lower": _jstr(lk.J_lower), "J_upper": _jstr(lk.J_upper), "polarization": _pol(lk.pol)}
    elif isinstance(lk, LadderLinkage):
        link = {"kind": "ladder_010", "first": _pol(lk.first), "second": _pol(lk.second)}
    else:
        v = lk.V.V if hasattr(lk.V, "V") else np.asarray(lk.V)
        link = {"kind": "explicit", "V": [[_cplx(x) for x in row] for row in v]}
    out = {
        "linkage": link,
        "pulse": {"shape": cfg.pulse.shape, "window": list(cfg.pulse.window)},
        "detuning": {"kind": cfg.detuning.kind, "value": cfg.detuning.value},
    }
    if cfg.initial_state is not None:
        out["initial_state"] = [_cplx(x) for x in cfg.initial_state]
    if cfg.subsystem is not None:
        out["subsystem"] = {"lower": list(cfg.subsystem[0]), "upper": list(cfg.subsystem[1])}
    if cfg.model is not None:
        out["model"] = cfg.model
    if cfg.design is not None:
        d = cfg.design
        dd = {"mode": d.mode, "targets": list(d.targets), "l": d.l}
        if d.Delta is not None:
            dd["Delta"] = d.Delta
        if d.lambda_max is not None:
            dd["lambda_max"] = d.lambda_max
        out["design"] = dd
    return out


def dump_config(cfg):
    """Serialize to JSON text. Floats use shortest round-trip repr, so parsing is bit-exact."""
    return json.dumps(to_dict(cfg), indent=2)
