"""Run configuration in a flat ``section.key = value`` text format.

Every accepted key is listed in :data:`KEYS` with its type, default and
a one-line description; unknown keys, malformed values and out-of-range
values are rejected with the offending line number.  Lists are
whitespace separated.  ``#`` starts a comment.

Example::

    domain.box = 0 1 0 1
    domain.resolution = 8 8
    material.lambda = 1
    material.mu = 1
    forces.body = 0 -0.01
"""

from dataclasses import dataclass
import math

import numpy as np

from .errors import InputError
from .forces import PROFILES
from .geometry import CATALOG
from .mesh import BOX_FACES

MODES = ("linear", "nonlinear", "convergence", "korn", "validate")
PHI0_KINDS = ("identity", "linear", "polar_embedding")


@dataclass(frozen=True)
class Key:
    kind: str          # float | int | str | floats | ints | words
    default: object
    doc: str


KEYS = {
    "domain.box": Key("floats", None, "per-axis intervals lo hi lo hi [lo hi]"),
    "domain.resolution": Key("ints", None, "cells per axis (one value applies to all axes)"),
    "domain.gamma2": Key("words", (), "box faces carrying tractions (xmin xmax ymin ...)"),
    "domain.mesh": Key("str", None, "RELAST-MESH file used instead of the box mesh"),
    "target.metric": Key("str", "euclidean", "ambient metric kind"),
    "target.dim": Key("int", None, "ambient dimension (defaults to the domain dimension)"),
    "target.radius": Key("float", None, "sphere radius"),
    "target.amplitude": Key("float", None, "perturbed_flat amplitude, |a| < 1"),
    "target.wavenumber": Key("float", None, "perturbed_flat wavenumber, k > 0"),
    "reference.phi0": Key("str", "identity", "identity | linear | polar_embedding"),
    "reference.matrix": Key("floats", None, "row-major d x d matrix of the linear phi0"),
    "reference.offset": Key("floats", None, "offset of the linear phi0"),
    "material.lambda": Key("float", None, "Lame constant lambda >= 0"),
    "material.mu": Key("float", None, "Lame constant mu > 0"),
    "forces.body": Key("floats", None, "constant dead body force (covector)"),
    "forces.profile": Key("str", "none", "dead body force profile: none | constant | sine2d | poly2d"),
    "forces.amplitude": Key("float", 1.0, "profile amplitude"),
    "forces.direction": Key("floats", None, "profile vector (defaults to all ones)"),
    "forces.traction": Key("floats", None, "constant dead traction on gamma2"),
    "forces.f1": Key("floats", None, "live part f1[i, j], row-major d x d"),
    "forces.f2": Key("floats", None, "live part f2[i, k, j], row-major d x d x d"),
    "solver.tol": Key("float", 1e-10, "relative stopping tolerance"),
    "solver.maxiter": Key("int", 200, "iteration limit"),
    "solver.mode": Key("str", "linear", "run mode: " + " | ".join(MODES)),
    "solver.levels": Key("ints", (8, 16, 32), "resolutions of the convergence study"),
    "solver.exact_direction": Key("floats", None, "vector of the manufactured sine field"),
    "solver.seed": Key("int", 0, "seed of the randomized estimators"),
    "output.directory": Key("str", "out", "output directory"),
}


@dataclass(frozen=True)
class RunConfig:
    """Validated configuration.  Lists are stored as tuples; absent optional
    keys are ``None``.  ``lines`` maps keys to their source line (not part
    of equality)."""

    box: tuple
    resolution: tuple
    gamma2: tuple
    mesh: object
    metric: str
    target_dim: int
    metric_params: tuple
    phi0: str
    matrix: object
    offset: object
    lam: float
    mu: float
    body: object
    profile: str
    amplitude: float
    direction: object
    traction: object
    f1: object
    f2: object
    tol: float
    maxiter: int
    mode: str
    levels: tuple
    exact_direction: object
    seed: int
    output: str

    @property
    def dim(self):
        return len(self.box) if self.box is not None else self.target_dim

    def params(self):
        return dict(self.metric_params)


def _parse_value(key, text, line):
    kind = KEYS[key].kind
    parts = text.split()
    if not parts:
        raise InputError("empty value", line, key)
    try:
        if kind == "float":
            if len(parts) != 1:
                raise ValueError
            v = float(parts[0])
            if not math.isfinite(v):
                raise InputError(f"{text!r} is not a finite number", line, key)
            return v
        if kind == "int":
            if len(parts) != 1:
                raise ValueError
            return int(parts[0])
        if kind == "str":
            return text.strip()
        if kind == "floats":
            vals = tuple(float(p) for p in parts)
            if not all(math.isfinite(v) for v in vals):
                raise InputError("values must be finite", line, key)
            return vals
        if kind == "ints":
            return tuple(int(p) for p in parts)
        return tuple(parts)
    except ValueError:
        expected = {"float": "a number", "int": "an integer", "floats": "numbers",
                    "ints": "integers"}[kind]
        raise InputError(f"expected {expected}, got {text!r}", line, key) from None


def _read_pairs(text):
    values, lines = {}, {}
    for n, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise InputError(f"expected 'section.key = value', got {raw.strip()!r}", n)
        key, val = (s.strip() for s in body.split("=", 1))
        if key not in KEYS:
            raise InputError("unknown key", n, key)
        if key in values:
            raise InputError(f"duplicate key (first set on line {lines[key]})", n, key)
        values[key] = _parse_value(key, val, n)
        lines[key] = n
    return values, lines


def parse_config(text):
    """Parse and validate configuration text into a :class:`RunConfig`.

    Defaults: solver.tol = 1e-10, solver.maxiter = 200,
    target.metric = euclidean, reference.phi0 = identity.
    """
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    values, lines = _read_pairs(text)

    def get(key):
        return values.get(key, KEYS[key].default)

    def fail(msg, key):
        raise InputError(msg, lines.get(key), key)

    # domain
    box = get("domain.box")
    mesh_path = get("domain.mesh")
    res = get("domain.resolution")
    if box is None:
        if mesh_path is None:
            fail("required (or give domain.mesh)", "domain.box")
        if get("target.dim") is None:
            fail("required when the domain comes from a mesh file", "target.dim")
        d = get("target.dim")
    else:
        if len(box) not in (4, 6):
            fail("needs 2 or 3 (lo, hi) pairs", "domain.box")
        box = tuple((box[2 * i], box[2 * i + 1]) for i in range(len(box) // 2))
        if any(not hi > lo for lo, hi in box):
            fail("every interval needs hi > lo", "domain.box")
        d = len(box)
        if res is None:
            if mesh_path is None:
                fail("required", "domain.resolution")
        else:
            if len(res) == 1:
                res = res * d
            if len(res) != d:
                fail(f"needs 1 or {d} values", "domain.resolution")
            if any(n < 1 for n in res):
                fail("cell counts must be >= 1", "domain.resolution")
    gamma2 = tuple(get("domain.gamma2"))
    for face in gamma2:
        if face not in BOX_FACES[: 2 * d]:
            fail(f"unknown face {face!r}; choose from {' '.join(BOX_FACES[:2 * d])}",
                 "domain.gamma2")

    # target
    metric = get("target.metric")
    if metric not in CATALOG:
        fail(f"unknown metric {metric!r}; choose from {' '.join(sorted(CATALOG))}", "target.metric")
    tdim = get("target.dim")
    if tdim is None:
        tdim = d
    if tdim != d:
        fail(f"must equal the domain dimension {d}", "target.dim")
    if tdim not in (2, 3):
        fail("must be 2 or 3", "target.dim")
    if metric in ("sphere", "polar_flat", "hyperbolic_half_plane") and tdim != 2:
        fail(f"{metric} is two-dimensional", "target.metric")
    allowed = {"sphere": ("radius",), "perturbed_flat": ("amplitude", "wavenumber")}.get(metric, ())
    params = []
    for name in ("radius", "amplitude", "wavenumber"):
        key = "target." + name
        if key in values:
            if name not in allowed:
                fail(f"not a parameter of {metric}", key)
            params.append((name, values[key]))
    pdict = dict(params)
    if "radius" in pdict and not pdict["radius"] > 0:
        fail("radius > 0 required", "target.radius")
    if "amplitude" in pdict and not abs(pdict["amplitude"]) < 1:
        fail("|amplitude| < 1 required", "target.amplitude")
    if "wavenumber" in pdict and not pdict["wavenumber"] > 0:
        fail("wavenumber > 0 required", "target.wavenumber")

    # reference
    phi0 = get("reference.phi0")
    if phi0 not in PHI0_KINDS:
        fail(f"unknown reference map {phi0!r}; choose from {' '.join(PHI0_KINDS)}", "reference.phi0")
    matrix, offset = get("reference.matrix"), get("reference.offset")
    if phi0 == "linear":
        if matrix is None:
            fail("required for reference.phi0 = linear", "reference.matrix")
        if len(matrix) != d * d:
            fail(f"needs {d * d} values", "reference.matrix")
        if not np.linalg.det(np.reshape(matrix, (d, d))) > 0:
            fail("determinant must be positive (orientation preserving)", "reference.matrix")
        if offset is not None and len(offset) != d:
            fail(f"needs {d} values", "reference.offset")
    else:
        for key in ("reference.matrix", "reference.offset"):
            if key in values:
                fail("only used with reference.phi0 = linear", key)
    if phi0 == "polar_embedding" and d != 2:
        fail("polar_embedding is two-dimensional", "reference.phi0")

    # material
    for key in ("material.lambda", "material.mu"):
        if key not in values:
            fail("required", key)
    lam, mu = values["material.lambda"], values["material.mu"]
    if not mu > 0:
        fail(f"mu = {mu!r} violates the constraint μ > 0", "material.mu")
    if not lam >= 0:
        fail(f"lambda = {lam!r} violates the constraint λ >= 0", "material.lambda")

    # forces
    body, profile = get("forces.body"), get("forces.profile")
    if profile not in PROFILES:
        fail(f"unknown profile {profile!r}; choose from {' '.join(PROFILES)}", "forces.profile")
    if body is not None and profile != "none":
        fail("give either forces.body or forces.profile, not both", "forces.body")
    if profile in ("sine2d", "poly2d") and d != 2:
        fail(f"{profile} is a two-dimensional profile", "forces.profile")
    for key, n in (("forces.body", d), ("forces.direction", d), ("forces.traction", d),
                   ("forces.f1", d * d), ("forces.f2", d ** 3), ("solver.exact_direction", d)):
        v = get(key)
        if v is not None and len(v) != n:
            fail(f"needs {n} values", key)
    if get("forces.traction") is not None and not gamma2 and mesh_path is None:
        fail("traction given but domain.gamma2 is empty", "forces.traction")

    # solver
    tol, maxiter, mode = get("solver.tol"), get("solver.maxiter"), get("solver.mode")
    if not tol > 0:
        fail("tol > 0 required", "solver.tol")
    if not maxiter >= 1:
        fail("maxiter >= 1 required", "solver.maxiter")
    if mode not in MODES:
        fail(f"unknown mode {mode!r}; choose from {' '.join(MODES)}", "solver.mode")
    levels = tuple(get("solver.levels"))
    if len(levels) < 2 or any(n < 1 for n in levels):
        fail("needs at least two resolutions >= 1", "solver.levels")
    seed = get("solver.seed")
    if seed < 0:
        fail("seed >= 0 required", "solver.seed")
    out = get("output.directory")

    cfg = RunConfig(box=box, resolution=None if res is None else tuple(res), gamma2=gamma2,
                    mesh=mesh_path, metric=metric, target_dim=tdim, metric_params=tuple(params),
                    phi0=phi0, matrix=matrix, offset=offset, lam=lam, mu=mu, body=body,
                    profile=profile, amplitude=get("forces.amplitude"),
                    direction=get("forces.direction"), traction=get("forces.traction"),
                    f1=get("forces.f1"), f2=get("forces.f2"), tol=tol, maxiter=maxiter,
                    mode=mode, levels=levels, exact_direction=get("solver.exact_direction"),
                    seed=seed, output=out)
    object.__setattr__(cfg, "lines", lines)
    return cfg


def _fmt(value):
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, (tuple, list)):
        return " ".join(_fmt(v) for v in value)
    return str(value)


def serialize_config(cfg):
    """Text form of a :class:`RunConfig` that parses back to an equal config."""
    flat = {
        "domain.box": None if cfg.box is None else tuple(v for iv in cfg.box for v in iv),
        "domain.resolution": cfg.resolution,
        "domain.gamma2": cfg.gamma2 or None,
        "domain.mesh": cfg.mesh,
        "target.metric": cfg.metric,
        "target.dim": cfg.target_dim if cfg.box is None else None,
        "reference.phi0": cfg.phi0,
        "reference.matrix": cfg.matrix,
        "reference.offset": cfg.offset,
        "material.lambda": cfg.lam,
        "material.mu": cfg.mu,
        "forces.body": cfg.body,
        "forces.profile": cfg.profile,
        "forces.amplitude": cfg.amplitude,
        "forces.direction": cfg.direction,
        "forces.traction": cfg.traction,
        "forces.f1": cfg.f1,
        "forces.f2": cfg.f2,
        "solver.tol": cfg.tol,
        "solver.maxiter": cfg.maxiter,
        "solver.mode": cfg.mode,
        "solver.levels": cfg.levels,
        "solver.exact_direction": cfg.exact_direction,
        "solver.seed": cfg.seed,
        "output.directory": cfg.output,
    }
    for name, value in cfg.metric_params:
        flat["target." + name] = value
    lines = [f"{key} = {_fmt(flat[key])}" for key in KEYS if flat.get(key) is not None]
    return "\n".join(lines) + "\n"


def describe_keys():
    """Documentation table of every accepted key."""
    out = []
    for key, entry in KEYS.items():
        default = "(required)" if entry.default is None and key in (
            "material.lambda", "material.mu") else _fmt(entry.default) if entry.default not in (
            None, ()) else "-"
        out.append(f"{key:26s} {entry.kind:7s} {default:12s} {entry.doc}")
    return "\n".join(out)


__all__ = ["RunConfig", "KEYS", "parse_config", "serialize_config", "describe_keys", "MODES"]
