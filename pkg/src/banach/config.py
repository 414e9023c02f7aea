"""Experiment configuration: schema, validation, canonical hashing.

A config is a JSON object naming one experiment, a body template, the
parameter grids, seeds, and constants.  Validation is strict: unknown
keys anywhere are errors, and messages carry the line of the offending
key in the original file whenever it can be located.  The hash covers
every semantic field (defaults applied, output location excluded) so
that two configs agree on the hash exactly when they run the same
numbers.
"""

from __future__ import annotations

import hashlib
import json
import math
import re
from dataclasses import dataclass, field

from .bodies import Body, body_from_spec
from .errors import ConfigError, InvalidBodyError
from .john import john_transform

EXPERIMENTS = (
    "stats", "lemma1", "smallball", "du", "schsch", "orderstats", "basis",
    "kashin", "blocks", "lochilbert", "refute", "rip", "generalrip", "jl",
    "cotype",
)

# grid keys each experiment consumes; the first tuple is required
_GRID_REQUIRED = {
    "stats": ("n",),
    "lemma1": ("n", "t"),
    "smallball": ("n", "t"),
    "du": ("n", "t"),
    "schsch": ("n", "t"),
    "orderstats": ("n",),
    "basis": ("n", "k"),
    "kashin": ("n",),
    "blocks": ("n", "eps"),
    "lochilbert": ("n", "k", "eps"),
    "refute": ("n", "eps"),
    "rip": ("n", "k", "eps"),
    "generalrip": ("n", "k", "eps"),
    "jl": ("n", "k", "eps"),
    "cotype": ("n",),
}
_GRID_OPTIONAL = {
    "blocks": ("k",),
}

_BODY_REQUIRED = frozenset({
    "stats", "lemma1", "smallball", "du", "schsch", "basis", "blocks",
    "lochilbert", "generalrip", "jl", "cotype",
})

_TOP_KEYS = frozenset({
    "experiment", "body", "grid", "seeds", "samples", "constants", "output",
    "john",
})

_CONSTANT_DEFAULTS = {
    "c_prime": 4.0,
    "C_jl": 8.0,
    "smallball_C": 1.0,
    "smallball_c1": 1.0,
    "smallball_c2": 1.0,
    "support_cap": 2000,
    "s": 0.6,
    "c_window": 2.0,
    "orderstats_c_prime": 0.05,
    "kashin_limit": 3.0,
    "blocks_b_limit": 5.0,
    "refute_family": "haar",
    "refute_noise": 0.02,
    "rip_m": 0,          # 0 means: derive m from (k, eps, n)
    "omega_size": 32,
    "jl_basis": "identity",
    "restarts": 4,
    "cotype_q": 2.0,
    "cotype_beta": 1.0,
}

_OUTPUT_KEYS = frozenset({"dir", "prefix"})

_SEED_MAX = 2 ** 64


def _line_of(raw: str, key: str):
    if raw is None:
        return None
    m = re.search(r'"%s"\s*:' % re.escape(key), raw)
    if m is None:
        return None
    return raw.count("\n", 0, m.start()) + 1


class _Checker:
    def __init__(self, raw):
        self.raw = raw

    def fail(self, key: str, msg: str):
        ln = _line_of(self.raw, key)
        where = f"line {ln}: " if ln else ""
        raise ConfigError(f"{where}{msg}")


@dataclass(frozen=True)
class ExperimentConfig:
    """One validated experiment description plus its canonical hash."""

    experiment: str
    body_spec: dict
    grid: dict
    seeds: tuple
    samples: int
    constants: dict
    output: dict
    john: bool
    config_hash: str = field(compare=False, default="")

    def body_for(self, n: int):
        """Instantiate the body template at dimension n.

        pnorm templates take the grid dimension; fixed-matrix bodies
        must already match it.  Returns (body, contact directions or
        None); positioning is applied when the config asks for it.
        """
        if self.body_spec is None:
            return None, None
        spec = dict(self.body_spec)
        if spec.get("kind") == "pnorm":
            spec["dim"] = int(n)
        body = body_from_spec(spec)
        if body.dim != n:
            raise ConfigError(
                f"body has dimension {body.dim} but the grid asks for n={n}")
        if self.john:
            body, cert = john_transform(body)
            return body, cert.contacts
        return body, None

    def diagnostics(self):
        """Non-fatal warnings, e.g. grid points an experiment will skip."""
        notes = []
        if self.experiment == "lemma1":
            for n in self.grid["n"]:
                bad = [t for t in self.grid["t"]
                       if not 1.0 <= t <= math.sqrt(n) + 1e-12]
                if bad:
                    notes.append(
                        "lemma1: t values %s outside [1, sqrt(%d)] will be skipped"
                        % (sorted(bad), n))
        return notes


def _canonical(experiment, body_spec, grid, samples, constants, john):
    # seeds and output are deliberately outside the hash: rows carry their
    # own seed, and reports merge across seed sets of one definition
    obj = {
        "experiment": experiment,
        "body": body_spec,
        "grid": {k: list(v) for k, v in grid.items()},
        "samples": samples,
        "constants": constants,
        "john": john,
    }
    blob = json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False)
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()[:16]


def parse_config(obj, raw: str = None) -> ExperimentConfig:
    chk = _Checker(raw)
    if not isinstance(obj, dict):
        raise ConfigError(f"config must be a JSON object, got {type(obj).__name__}")
    extra = set(obj) - _TOP_KEYS
    if extra:
        chk.fail(sorted(extra)[0], f"unknown config keys {sorted(extra)}")

    exp = obj.get("experiment")
    if exp not in EXPERIMENTS:
        chk.fail("experiment", f"experiment must be one of {list(EXPERIMENTS)}, got {exp!r}")

    john = obj.get("john", False)
    if not isinstance(john, bool):
        chk.fail("john", f"john must be a boolean, got {john!r}")

    body_spec = obj.get("body")
    if body_spec is None and exp in _BODY_REQUIRED:
        chk.fail("experiment", f"experiment {exp!r} needs a body")
    if body_spec is not None:
        try:
            template = body_from_spec(body_spec)
        except InvalidBodyError as e:
            chk.fail("body", f"bad body: {e}")
        if body_spec.get("kind") != "pnorm" and "n" in obj.get("grid", {}):
            ns = obj["grid"]["n"]
            if isinstance(ns, list) and any(v != template.dim for v in ns):
                chk.fail("n", f"fixed body of dimension {template.dim} cannot run at n={ns}")

    grid_in = obj.get("grid")
    if not isinstance(grid_in, dict) or not grid_in:
        chk.fail("grid", "grid must be a non-empty object")
    allowed = set(_GRID_REQUIRED[exp]) | set(_GRID_OPTIONAL.get(exp, ()))
    extra = set(grid_in) - allowed
    if extra:
        chk.fail(sorted(extra)[0],
                 f"grid keys {sorted(extra)} do not apply to {exp!r} (allowed: {sorted(allowed)})")
    missing = [k for k in _GRID_REQUIRED[exp] if k not in grid_in]
    if missing:
        chk.fail("grid", f"experiment {exp!r} needs grid lists {missing}")
    grid = {}
    for key, vals in grid_in.items():
        if not isinstance(vals, list) or not vals:
            chk.fail(key, f"grid.{key} must be a non-empty list")
        if key in ("n", "k"):
            if not all(isinstance(v, int) and not isinstance(v, bool) and v >= 1
                       for v in vals):
                chk.fail(key, f"grid.{key} entries must be positive integers")
            grid[key] = tuple(int(v) for v in vals)
        elif key == "eps":
            if not all(isinstance(v, (int, float)) and not isinstance(v, bool)
                       and 0 < v < 1 for v in vals):
                chk.fail(key, f"grid.{key} entries must lie in (0, 1)")
            grid[key] = tuple(float(v) for v in vals)
        else:
            if not all(isinstance(v, (int, float)) and not isinstance(v, bool)
                       and math.isfinite(v) and v > 0 for v in vals):
                chk.fail(key, f"grid.{key} entries must be positive finite reals")
            grid[key] = tuple(float(v) for v in vals)

    seeds = obj.get("seeds")
    if not isinstance(seeds, list) or not seeds:
        chk.fail("seeds", "seeds must be a non-empty list of integers")
    for s in seeds:
        if not isinstance(s, int) or isinstance(s, bool) or not 0 <= s < _SEED_MAX:
            chk.fail("seeds", f"seed {s!r} is not a 64-bit unsigned integer")
    samples = obj.get("samples")
    if not isinstance(samples, int) or isinstance(samples, bool) or samples < 100:
        chk.fail("samples", f"samples must be an integer >= 100, got {samples!r}")

    constants = dict(_CONSTANT_DEFAULTS)
    user_const = obj.get("constants", {})
    if not isinstance(user_const, dict):
        chk.fail("constants", "constants must be an object")
    for key, val in user_const.items():
        if key not in _CONSTANT_DEFAULTS:
            chk.fail(key, f"unknown constant {key!r} (known: {sorted(_CONSTANT_DEFAULTS)})")
        want = type(_CONSTANT_DEFAULTS[key])
        if want is float and isinstance(val, int) and not isinstance(val, bool):
            val = float(val)
        if not isinstance(val, want) or isinstance(val, bool) is not isinstance(_CONSTANT_DEFAULTS[key], bool):
            chk.fail(key, f"constant {key!r} must be {want.__name__}, got {val!r}")
        constants[key] = val

    output = obj.get("output", {})
    if not isinstance(output, dict):
        chk.fail("output", "output must be an object")
    extra = set(output) - _OUTPUT_KEYS
    if extra:
        chk.fail(sorted(extra)[0], f"unknown output keys {sorted(extra)}")
    out = {"dir": output.get("dir", "."), "prefix": output.get("prefix", exp)}
    if not isinstance(out["dir"], str) or not isinstance(out["prefix"], str):
        chk.fail("output", "output.dir and output.prefix must be strings")

    h = _canonical(exp, body_spec, grid, samples, constants, john)
    return ExperimentConfig(exp, body_spec, grid, tuple(seeds), samples,
                            constants, out, john, h)


def load_config(path: str) -> ExperimentConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            raw = fh.read()
    except OSError as e:
        raise ConfigError(f"cannot read {path}: {e.strerror or e}")
    try:
        obj = json.loads(raw)
    except json.JSONDecodeError as e:
        raise ConfigError(f"line {e.lineno}: {e.msg}")
    return parse_config(obj, raw)
