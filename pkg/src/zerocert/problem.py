"""Problem configuration files.

The format is INI (parsed with :mod:`configparser`, no interpolation, ``#``
comments at line start, case-sensitive keys). Values are numbers, vectors or
matrices::

    number  := a Python float literal              e.g.  2.5   1e-9
    vector  := numbers separated by spaces/commas  e.g.  0 0   1, 0.5
    matrix  := vectors separated by ';'            e.g.  3 0; 0 1

Sections:

``[operator]``   ``name`` (catalog name), optional ``jacobian`` (analytic or
                 finite-difference) and ``fd_step``; every other key is a
                 catalog parameter.
``[region]``     the region V: ``type`` = segment (``a``, ``b``), polytope
                 (``vertices``, a matrix) or ball (``center``, ``radius``).
``[body]``       optional body X with the same keys; defaults to the region.
``[run]``        ``resolution``, ``seed``, ``budget``, ``trials``, ``n_max``
                 (integers), ``tol`` (hull tolerance) and ``L`` (asserted
                 Lipschitz constant of Phi', overriding the catalog value).
``[tolerances]`` overrides of the library defaults by field name.

:func:`dump_config` writes the canonical form; floats use ``repr`` so that
``parse_config(dump_config(c)) == c`` bit for bit.
"""

import configparser
from dataclasses import asdict, dataclass, field

import numpy as np

from . import geometry as geo
from .config import DEFAULTS

_RUN_INTS = ("resolution", "seed", "budget", "trials", "n_max")
_RUN_FLOATS = ("tol", "L")


def parse_value(text: str):
    """Number, vector or matrix from the value grammar."""
    text = text.strip()
    if not text:
        raise ValueError("empty value")
    if ";" in text:
        rows = [parse_value(r) for r in text.split(";") if r.strip()]
        return [r if isinstance(r, list) else [r] for r in rows]
    parts = text.replace(",", " ").split()
    nums = [float(p) for p in parts]
    return nums[0] if len(nums) == 1 else nums


def format_value(value) -> str:
    if isinstance(value, (list, tuple, np.ndarray)):
        value = np.asarray(value, dtype=float)
        if value.ndim == 2:
            return "; ".join(" ".join(repr(float(x)) for x in row) for row in value)
        return " ".join(repr(float(x)) for x in value)
    return repr(float(value))


@dataclass(frozen=True)
class ProblemConfig:
    operator: str
    params: dict = field(default_factory=dict)
    jacobian: str = "analytic"
    fd_step: float | None = None
    region: dict | None = None
    body: dict | None = None
    resolution: int = 16
    seed: int = 0
    budget: int = 2000
    trials: int = 1000
    n_max: int = 10
    tol: float | None = None
    L: float | None = None
    tolerances: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return asdict(self)

    def tolerance_record(self):
        return DEFAULTS.override(**self.tolerances)


def _body_spec(section):
    kind = section.get("type", "").strip().lower()
    if kind == "segment":
        return {"type": "segment", "a": parse_value(section["a"]), "b": parse_value(section["b"])}
    if kind == "polytope":
        V = parse_value(section["vertices"])
        if not isinstance(V[0], list):
            V = [V]
        return {"type": "polytope", "vertices": V}
    if kind == "ball":
        return {"type": "ball", "center": parse_value(section["center"]),
                "radius": float(parse_value(section["radius"]))}
    raise ValueError(f"unknown body type {kind!r} (expected segment, polytope or ball)")


def body_from_spec(spec: dict) -> geo.ConvexBody:
    """ConvexBody for a body spec dict."""
    if spec["type"] == "segment":
        return geo.Segment(spec["a"], spec["b"])
    if spec["type"] == "polytope":
        return geo.Polytope(spec["vertices"])
    if spec["type"] == "ball":
        return geo.Ball(spec["center"], spec["radius"])
    raise ValueError(f"unknown body type {spec['type']!r}")


def spec_from_body(body: geo.ConvexBody) -> dict:
    if isinstance(body, geo.Segment):
        return {"type": "segment", "a": body.a.tolist(), "b": body.b.tolist()}
    if isinstance(body, geo.Ball):
        return {"type": "ball", "center": body.center.tolist(), "radius": float(body.radius)}
    return {"type": "polytope", "vertices": body.vertices().tolist()}


def _parser():
    cp = configparser.ConfigParser(interpolation=None, comment_prefixes=("#",),
                                   inline_comment_prefixes=None, strict=True)
    cp.optionxform = str
    return cp


def parse_config(text: str) -> ProblemConfig:
    cp = _parser()
    cp.read_string(text)
    if not cp.has_section("operator") or "name" not in cp["operator"]:
        raise ValueError("config needs an [operator] section with a name")
    op = dict(cp["operator"])
    name = op.pop("name").strip()
    jac = op.pop("jacobian", "analytic").strip()
    fd = op.pop("fd_step", None)
    params = {k: parse_value(v) for k, v in op.items()}
    kw = {}
    if cp.has_section("run"):
        run = cp["run"]
        for key in run:
            if key in _RUN_INTS:
                kw[key] = int(run[key])
            elif key in _RUN_FLOATS:
                kw[key] = float(run[key])
            else:
                raise ValueError(f"unknown [run] key {key!r}")
    tolerances = {}
    if cp.has_section("tolerances"):
        tolerances = {k: v.strip() for k, v in cp["tolerances"].items()}
        typed = DEFAULTS.override(**tolerances).as_dict()
        tolerances = {k: typed[k] for k in tolerances}
    cfg = ProblemConfig(
        operator=name,
        params=params,
        jacobian=jac,
        fd_step=None if fd is None else float(fd),
        region=_body_spec(cp["region"]) if cp.has_section("region") else None,
        body=_body_spec(cp["body"]) if cp.has_section("body") else None,
        tolerances=tolerances,
        **kw,
    )
    if cfg.resolution < 1:
        raise ValueError("resolution must be at least 1")
    for extra in set(cp.sections()) - {"operator", "region", "body", "run", "tolerances"}:
        raise ValueError(f"unknown section [{extra}]")
    return cfg


def _dump_body(lines, title, spec):
    lines.append(f"[{title}]")
    lines.append(f"type = {spec['type']}")
    for key in ("a", "b", "vertices", "center", "radius"):
        if key in spec:
            lines.append(f"{key} = {format_value(spec[key])}")
    lines.append("")


def dump_config(cfg: ProblemConfig) -> str:
    """Canonical text for ``cfg``."""
    lines = ["[operator]", f"name = {cfg.operator}", f"jacobian = {cfg.jacobian}"]
    if cfg.fd_step is not None:
        lines.append(f"fd_step = {cfg.fd_step!r}")
    for k in sorted(cfg.params):
        lines.append(f"{k} = {format_value(cfg.params[k])}")
    lines.append("")
    if cfg.region is not None:
        _dump_body(lines, "region", cfg.region)
    if cfg.body is not None:
        _dump_body(lines, "body", cfg.body)
    lines.append("[run]")
    for key in _RUN_INTS:
        lines.append(f"{key} = {getattr(cfg, key)}")
    for key in _RUN_FLOATS:
        if getattr(cfg, key) is not None:
            lines.append(f"{key} = {getattr(cfg, key)!r}")
    lines.append("")
    if cfg.tolerances:
        lines.append("[tolerances]")
        for k in sorted(cfg.tolerances):
            lines.append(f"{k} = {cfg.tolerances[k]!r}")
        lines.append("")
    return "\n".join(lines)
