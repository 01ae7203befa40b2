"""Dotted-key run configuration: parsing, typing and per-command schemas.

Config files are plain text, one `key = value` per line, `#` comments.
Values are typed by shape: true/false, none, integers, floats, comma
lists, everything else a bare string (paths, kind names, the "median"
bandwidth sentinel). Keys are dotted paths named after the library's
dataclass fields (kernel.static.bandwidth, features.n_components, ...).

Every command owns a closed key set; unknown keys are rejected with their
full field path. Thread count is deliberately not a config key, so the
same file must produce identical results at any parallelism (it is a CLI
flag / environment variable instead).
"""

from __future__ import annotations

from .benchmarks import BENCH_METHODS
from .errors import ConfigError, ParseError
from .features import VARIANTS
from .kernels import ALGORITHMS, NORMALIZATIONS
from .static.features import FEATURE_KINDS
from .static.kernels import KERNEL_KINDS

__all__ = ["COMMANDS", "parse_config_text", "validate_config", "load_config"]

COMMANDS = ("synth", "gram", "features", "mape", "bench", "classify")


def _scalar(token: str):
    t = token.strip()
    low = t.lower()
    if low == "true":
        return True
    if low == "false":
        return False
    if low in ("none", "null"):
        return None
    try:
        return int(t)
    except ValueError:
        pass
    try:
        return float(t)
    except ValueError:
        pass
    return t


def parse_config_text(text: str) -> dict:
    """Parse `key = value` lines into a flat dict of typed values."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParseError(f"expected 'key = value', got {line!r}", line=lineno)
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if not key:
            raise ParseError("missing key before '='", line=lineno)
        if not value:
            raise ParseError(f"missing value for key {key!r}", line=lineno)
        if key in out:
            raise ParseError(f"duplicate key {key!r}", line=lineno)
        if "," in value:
            items = [v.strip() for v in value.split(",")]
            if any(not v for v in items):
                raise ParseError(f"empty element in list value for {key!r}", line=lineno)
            out[key] = [_scalar(v) for v in items]
        else:
            out[key] = _scalar(value)
    return out


def _fail(key, value, want):
    raise ConfigError(f"{key}: expected {want}, got {value!r}")


def _as_bool(key, v):
    if isinstance(v, bool):
        return v
    _fail(key, v, "true or false")


def _as_str(key, v):
    if isinstance(v, str):
        return v
    _fail(key, v, "a string")


def _choice(options):
    def cast(key, v):
        if isinstance(v, str) and v in options:
            return v
        _fail(key, v, f"one of {', '.join(options)}")
    return cast


def _as_int(lo=None, hi=None):
    def cast(key, v):
        if isinstance(v, bool) or not isinstance(v, int):
            _fail(key, v, "an integer")
        if lo is not None and v < lo:
            _fail(key, v, f"an integer >= {lo}")
        if hi is not None and v > hi:
            _fail(key, v, f"an integer <= {hi}")
        return v
    return cast


def _as_float(positive=False):
    def cast(key, v):
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            _fail(key, v, "a number")
        if positive and not v > 0:
            _fail(key, v, "a positive number")
        return float(v)
    return cast


def _as_order(key, v):
    if v is None:
        return None
    if isinstance(v, bool) or not isinstance(v, int):
        _fail(key, v, "a positive integer or none")
    if v < 1:
        _fail(key, v, "a positive integer or none")
    return v


def _as_bandwidth(key, v):
    if isinstance(v, str):
        if v == "median":
            return v
        _fail(key, v, 'a positive number or "median"')
    return _as_float(positive=True)(key, v)


def _list_of(cast):
    def caster(key, v):
        items = v if isinstance(v, list) else [v]
        return [cast(key, item) for item in items]
    return caster


def _as_drift(key, v):
    if v is None:
        return None
    return _list_of(_as_float())(key, v)


_COMMON = {
    "command": (_choice(COMMANDS), None),
    "seed": (_as_int(lo=0, hi=2 ** 64 - 1), 0),
    "output": (_as_str, None),
}

_STATIC_KERNEL = {
    "kernel.static.kind": (_choice(KERNEL_KINDS), "rbf"),
    "kernel.static.scale": (_as_float(positive=True), 1.0),
    "kernel.static.degree": (_as_int(lo=1), 3),
    "kernel.static.gamma": (_as_float(), 1.0),
    "kernel.static.bandwidth": (_as_bandwidth, 1.0),
    "kernel.static.alpha": (_as_float(positive=True), 1.0),
}

_KERNEL = {
    **_STATIC_KERNEL,
    "kernel.n_levels": (_as_int(lo=0), 5),
    "kernel.order": (_as_order, 1),
    "kernel.difference": (_as_bool, True),
    "kernel.normalization": (_choice(NORMALIZATIONS), "none"),
    "kernel.algorithm": (_choice(ALGORITHMS), "dp"),
}

_FEATURES = {
    "features.variant": (_choice(VARIANTS), "trp"),
    "features.static.kind": (_choice(FEATURE_KINDS), None),
    "features.static.bandwidth": (_as_bandwidth, 1.0),
    "features.n_components": (_as_int(lo=1), 100),
    "features.projection": (_as_int(lo=1), 100),
    "features.n_levels": (_as_int(lo=0), 5),
    "features.order": (_as_order, 1),
    "features.difference": (_as_bool, True),
    "features.normalize": (_as_bool, False),
}

_SCHEMAS = {
    "synth": {
        **_COMMON,
        "synth.n": (_as_int(lo=1), 10),
        "synth.length": (_as_int(lo=2), 100),
        "synth.dim": (_as_int(lo=1), 2),
        "synth.drift": (_as_drift, None),
    },
    "gram": {
        **_COMMON,
        "input": (_as_str, None),
        **_KERNEL,
    },
    "features": {
        **_COMMON,
        "input": (_as_str, None),
        **_FEATURES,
    },
    "mape": {
        **_COMMON,
        **_STATIC_KERNEL,
        **_FEATURES,
        "mape.n": (_as_int(lo=2), 10),
        "mape.length": (_as_int(lo=2), 50),
        "mape.dim": (_as_int(lo=1), 2),
        "mape.lifted": (_as_bool, False),
    },
    "bench": {
        **_COMMON,
        "kernel.static.kind": (_choice(KERNEL_KINDS), "rbf"),
        "kernel.static.bandwidth": (_as_bandwidth, "median"),
        "bench.methods": (_list_of(_choice(BENCH_METHODS)), list(BENCH_METHODS)),
        "bench.n_list": (_list_of(_as_int(lo=1)), [10]),
        "bench.l_list": (_list_of(_as_int(lo=2)), [100]),
        "bench.dq_list": (_list_of(_as_int(lo=1)), [100]),
        "bench.m_list": (_list_of(_as_int(lo=0)), [5]),
        "bench.dim": (_as_int(lo=1), 5),
        "bench.order": (_as_order, 1),
        "bench.difference": (_as_bool, True),
        "bench.mape": (_as_bool, False),
        "bench.n_seeds": (_as_int(lo=1), 1),
        "bench.wall_time": (_as_bool, True),
    },
    "classify": {
        **_COMMON,
        "kernel.static.kind": (_choice(KERNEL_KINDS), "rbf"),
        "kernel.static.bandwidth": (_as_bandwidth, "median"),
        "classify.n_per_class": (_as_int(lo=4), 100),
        "classify.length": (_as_int(lo=2), 50),
        "classify.dim": (_as_int(lo=1), 3),
        "classify.drift": (_as_float(positive=True), 0.5),
        "classify.n_levels": (_as_int(lo=0), 4),
        "classify.order": (_as_order, 1),
        "classify.lambdas": (_list_of(_as_float(positive=True)),
                             [1e-3, 1e-2, 1e-1, 1.0, 1e1, 1e2, 1e3]),
        "classify.n_folds": (_as_int(lo=2), 3),
        "classify.n_seeds": (_as_int(lo=1), 5),
    },
}

_REQUIRED = {
    "gram": ("input",),
    "features": ("input",),
}


def validate_config(raw: dict, command: str | None = None) -> dict:
    """Check keys against the command's schema and fill defaults.

    command, when given (from the CLI argument), must agree with any
    `command` key in the file. Returns a complete typed dict.
    """
    file_cmd = raw.get("command")
    if file_cmd is not None and not isinstance(file_cmd, str):
        raise ConfigError(f"command: expected one of {', '.join(COMMANDS)}, got {file_cmd!r}")
    cmd = command if command is not None else file_cmd
    if cmd is None:
        raise ConfigError("command: missing (set the 'command' key or pass it on the CLI)")
    if cmd not in COMMANDS:
        raise ConfigError(f"command: expected one of {', '.join(COMMANDS)}, got {cmd!r}")
    if file_cmd is not None and file_cmd != cmd:
        raise ConfigError(
            f"command: config file says {file_cmd!r} but the CLI was invoked with {cmd!r}")
    schema = _SCHEMAS[cmd]
    out = {"command": cmd}
    for key, value in raw.items():
        if key == "command":
            continue
        if key not in schema:
            raise ConfigError(f"unknown config key {key!r} for command {cmd!r}")
        cast, _ = schema[key]
        out[key] = cast(key, value)
    for key, (cast, default) in schema.items():
        if key not in out:
            out[key] = default
    for key in _REQUIRED.get(cmd, ()):
        if out.get(key) is None:
            raise ConfigError(f"{key}: required for command {cmd!r}")
    return out


def load_config(path, command: str | None = None) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    return validate_config(parse_config_text(text), command)
