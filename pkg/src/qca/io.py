"""Experiment configuration, deterministic CSV/JSON output and plot scripts.

A config file is INI text with one ``[experiment]`` section::

    [experiment]
    command = zitter
    mass = 0.15
    c_minus = 0.7071067811865476j

Keys not in the command's schema are rejected by name.
"""

from __future__ import annotations

import configparser
import csv
import io
import json
import math
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable

import numpy as np

from qca import __version__

FLOAT_FORMAT = "%.17g"
OUTPUT_ENV = "QCA_OUTPUT_DIR"
SECTION = "experiment"


class ConfigError(ValueError):
    """Invalid experiment configuration; ``key`` names the offending field."""

    def __init__(self, key: str, message: str):
        super().__init__(f"{key}: {message}")
        self.key = key


@dataclass(frozen=True)
class Field:
    kind: Callable[[str], Any]
    default: Any = None
    check: Callable[[Any], str | None] | None = None
    help: str = ""


def _range(lo, hi, closed=True):
    def check(value):
        ok = lo <= value <= hi if closed else lo < value < hi
        if not ok:
            bracket = "[{}, {}]" if closed else "({}, {})"
            return "must lie in " + bracket.format(lo, hi)
        return None

    return check


def _positive(value):
    return None if value > 0 else "must be positive"


def _non_negative(value):
    return None if value >= 0 else "must be non-negative"


def _power_of_two(value):
    return None if value > 0 and value & (value - 1) == 0 else "must be a power of two"


def _chirality(value):
    return None if value in (1, -1) else "must be +1 or -1"


def _model(value):
    names = ("weyl1d", "weyl2d", "weyl3d", "dirac1d", "dirac2d", "dirac3d")
    return None if value in names else f"must be one of {', '.join(names)}"


def _floats(text: str) -> tuple[float, ...]:
    return tuple(float(part) for part in str(text).replace(",", " ").split())


def _complex(text: str) -> complex:
    return complex(str(text).replace(" ", ""))


def _criterion(value):
    return None if 1 <= value <= 9 else "must be a criterion number from 1 to 9"


COMMON = {
    "output": Field(str, None, help="output file stem (default: the command name)"),
    "seed": Field(int, 0, _non_negative, "seed for randomized sampling"),
}

SCHEMAS: dict[str, dict[str, Field]] = {
    "dispersion": {
        "model": Field(str, "dirac1d", _model),
        "mass": Field(float, 0.0, _range(0.0, 1.0)),
        "chirality": Field(int, -1, _chirality),
        "samples": Field(int, 1024, _positive),
        "direction": Field(_floats, None, help="scan direction for 2D/3D models"),
    },
    "evolve": {
        "model": Field(str, "dirac1d", _model),
        "mass": Field(float, 0.15, _range(0.0, 1.0)),
        "chirality": Field(int, -1, _chirality),
        "k0": Field(_floats, (0.5,)),
        "sigma": Field(float, 1 / 40, _positive),
        "c_plus": Field(_complex, None),
        "c_minus": Field(_complex, 0j),
        "x0": Field(_floats, None),
        "t_max": Field(int, 200, _non_negative),
        "samples": Field(int, 21, _positive),
        "grid": Field(int, None, _power_of_two),
    },
    "dispersive": {
        "model": Field(str, "dirac1d", _model),
        "mass": Field(float, 0.15, _range(0.0, 1.0)),
        "k0": Field(float, 0.1),
        "sigma": Field(float, 1 / 40, _positive),
        "hermite": Field(_floats, None, help="Hermite coefficients h_0 h_1 ..."),
        "t_max": Field(int, 600, _non_negative),
        "samples": Field(int, 13, _positive),
        "grid": Field(int, 2**14, _power_of_two),
    },
    "zitter": {
        "mass": Field(float, 0.15, _range(0.0, 1.0, closed=False)),
        "k0": Field(float, 0.0),
        "sigma": Field(float, 1 / 40, _positive),
        "c_plus": Field(_complex, None),
        "c_minus": Field(_complex, complex(math.sqrt(0.5))),
        "x0": Field(float, 0.0),
        "t_max": Field(int, 4000, _positive),
        "grid": Field(int, 2**14, _power_of_two),
    },
    "scatter": {
        "mass": Field(float, 0.4, _range(0.0, 1.0, closed=False)),
        "k0": Field(float, 2.0),
        "sigma": Field(float, 1 / 15, _positive),
        "phi": Field(float, 1.42),
        "max_steps": Field(int, 10000, _positive),
    },
    "klein-scan": {
        "mass": Field(float, 0.4, _range(0.0, 1.0, closed=False)),
        "k0": Field(float, 2.0),
        "sigma": Field(float, 1 / 80, _positive),
        "phi_min": Field(float, 1.2),
        "phi_max": Field(float, 2.8),
        "points": Field(int, 40, _positive),
        "max_steps": Field(int, 10000, _positive),
    },
    "maxwell": {
        "chirality": Field(int, -1, _chirality),
        "direction": Field(_floats, (1.0, 1.0, 1.0)),
        "k_min": Field(float, 1e-3, _positive),
        "k_max": Field(float, 1.0, _positive),
        "samples": Field(int, 64, _positive),
    },
    "boost": {
        "mass": Field(float, 0.3, _range(0.0, 1.0, closed=False)),
        "betas": Field(_floats, (-0.9, -0.5, -0.1, 0.1, 0.5, 0.9)),
        "points": Field(int, 100, _positive),
    },
    "pheno": {
        "mass": Field(float, 1e-19, _positive, "particle mass in Planck masses"),
        "width_fm": Field(float, 100.0, _positive),
        "distance_m": Field(float, 3.0e25, _positive, "GRB source distance in metres"),
        "k1": Field(_floats, (1e-3, 1e-3, 1e-3)),
        "k2": Field(_floats, (1e-9, 1e-9, 1e-9)),
        "chirality": Field(int, -1, _chirality),
    },
    "check": {
        "criterion": Field(int, None, _criterion),
    },
}

REQUIRED = {"check": ("criterion",)}


@dataclass
class ExperimentConfig:
    command: str
    params: dict = field(default_factory=dict)

    @property
    def seed(self) -> int:
        return self.params["seed"]

    def __getitem__(self, key):
        return self.params[key]

    def resolved(self) -> dict:
        """JSON-friendly view of every parameter, defaults included."""

        def plain(v):
            if isinstance(v, complex):
                return {"re": v.real, "im": v.imag}
            if isinstance(v, tuple):
                return list(v)
            return v

        return {"command": self.command, **{k: plain(v) for k, v in sorted(self.params.items())}}


def schema(command: str) -> dict[str, Field]:
    if command not in SCHEMAS:
        raise ConfigError("command", f"unknown command {command!r}; expected one of {', '.join(SCHEMAS)}")
    return {**COMMON, **SCHEMAS[command]}


def _convert(key: str, spec: Field, raw):
    if raw is None:
        return None
    try:
        value = spec.kind(raw) if isinstance(raw, str) else raw
    except (TypeError, ValueError):
        raise ConfigError(key, f"cannot parse {raw!r} as {getattr(spec.kind, '__name__', 'value')}") from None
    if spec.check is not None:
        problem = spec.check(value)
        if problem:
            raise ConfigError(key, f"{problem} (got {raw})")
    return value


def parse_pairs(pairs) -> dict[str, str]:
    out = {}
    for item in pairs or ():
        if "=" not in item:
            raise ConfigError(item, "override must look like key=value")
        key, value = item.split("=", 1)
        out[key.strip()] = value.strip()
    return out


def parse_config(text: str | None = None, command: str | None = None, overrides: dict | None = None) -> ExperimentConfig:
    """Build a validated config from INI text plus overrides (overrides win)."""
    raw: dict[str, str] = {}
    if text:
        parser = configparser.ConfigParser(interpolation=None)
        parser.optionxform = str
        try:
            parser.read_string(text)
        except configparser.Error as exc:
            raise ConfigError("file", f"unreadable config: {exc}") from None
        if not parser.has_section(SECTION):
            raise ConfigError(SECTION, "config needs an [experiment] section")
        raw.update(parser[SECTION])
    file_command = raw.pop("command", None)
    if command and file_command and command != file_command:
        raise ConfigError("command", f"file says {file_command!r}, command line says {command!r}")
    command = command or file_command
    if not command:
        raise ConfigError("command", "missing required key")
    fields = schema(command)
    raw.update({k: v for k, v in (overrides or {}).items() if v is not None})
    for key in raw:
        if key not in fields:
            raise ConfigError(key, f"unknown key for command {command!r}")
    params = {}
    for key, spec in fields.items():
        params[key] = _convert(key, spec, raw[key]) if key in raw else spec.default
    for key in REQUIRED.get(command, ()):
        if params[key] is None:
            raise ConfigError(key, "missing required key")
    _check_weights(params)
    return ExperimentConfig(command, params)


def _check_weights(params):
    if "c_minus" not in params:
        return
    c_minus = params["c_minus"]
    if params.get("c_plus") is None:
        rest = 1 - abs(c_minus) ** 2
        if rest < -1e-12:
            raise ConfigError("c_minus", "|c_minus| must not exceed 1")
        params["c_plus"] = complex(math.sqrt(max(rest, 0.0)))
    weight = abs(params["c_plus"]) ** 2 + abs(c_minus) ** 2
    if abs(weight - 1) > 1e-9:
        raise ConfigError("c_plus", f"|c_plus|^2 + |c_minus|^2 must be 1 (got {weight:.12g})")


def output_dir(explicit: str | None = None) -> Path:
    return Path(explicit or os.environ.get(OUTPUT_ENV) or ".")


def _format(value) -> str:
    if value is None:
        return ""
    if isinstance(value, str):
        return value
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, (int,)) and not isinstance(value, bool):
        return str(value)
    return FLOAT_FORMAT % float(value)


def format_rows(columns, rows) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(columns)
    writer.writerows([_format(v) for v in row] for row in rows)
    return buffer.getvalue()


def _json_default(value):
    # numpy scalars and arrays leak out of the fitters
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    raise TypeError(f"{type(value).__name__} is not JSON serializable")


def header_block(meta: dict) -> str:
    text = json.dumps(meta, indent=1, sort_keys=True, default=_json_default)
    return "".join(f"# {line}\n" for line in text.splitlines())


def atomic_write(path: Path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_csv(path, config: ExperimentConfig, columns, rows, wall_clock: float, extra: dict | None = None) -> Path:
    meta = {
        "tool": "qca",
        "version": __version__,
        "config": config.resolved(),
        "wall_clock_s": round(wall_clock, 3),
        "columns": list(columns),
    }
    if extra:
        meta.update(extra)
    atomic_write(Path(path), header_block(meta) + format_rows(columns, rows))
    return Path(path)


def write_json(path, payload: dict) -> Path:
    atomic_write(Path(path), json.dumps(payload, indent=2, sort_keys=True, default=_json_default) + "\n")
    return Path(path)


def data_section(path) -> str:
    """The CSV body without the '#' header (the part covered by determinism)."""
    with open(path) as fh:
        return "".join(line for line in fh if not line.startswith("#"))


def read_csv(path):
    """Return ``(meta, columns, rows)`` with rows as lists of strings."""
    header, body = [], []
    with open(path) as fh:
        for line in fh:
            (header if line.startswith("#") else body).append(line)
    meta = json.loads("".join(line[2:] for line in header)) if header else {}
    columns, *rows = csv.reader(body)
    return meta, columns, rows


PLOT_KINDS = {
    # schema -> (x column, y columns, x label, y label, title)
    "dispersion": ("k", ["omega"], "k", "omega(k)", "Dispersion relation"),
    "evolve": ("t", ["mean_x1"], "t", "<X>", "Packet centre"),
    "dispersive": ("t", ["l2_error"], "t", "||psi_exact - psi_approx||", "Dispersive approximation error"),
    "zitter": ("t", ["x_total", "x_plus", "x_minus", "x_int"], "t", "position", "Mean-position components"),
    "klein-scan": ("phi", ["R", "T"], "phi", "probability", "Reflection and transmission"),
    "maxwell": ("k", ["c"], "|k|", "c(k)", "Photon group speed"),
    "boost": ("k", ["omega"], "k", "omega", "Deformed boost orbits"),
}

PLOT_TEMPLATE = '''"""Plot {title} from {csv_name}."""

import sys

import matplotlib.pyplot as plt
import numpy as np

path = sys.argv[1] if len(sys.argv) > 1 else {csv_path!r}
data = np.genfromtxt(path, delimiter=",", comments="#", names=True, dtype=None, encoding=None)

fig, ax = plt.subplots(figsize=(6, 4))
for name in {y_cols!r}:
    ax.plot(data[{x_col!r}], data[name], {style!r}, label=name)
ax.set_xlabel({x_label!r})
ax.set_ylabel({y_label!r})
ax.set_title({title!r})
ax.legend()
fig.tight_layout()
fig.savefig({png!r}, dpi=150)
'''


def emit_plot_script(csv_path, kind: str | None = None, script_path=None) -> Path:
    """Write (never run) a matplotlib script that plots ``csv_path``."""
    csv_path = Path(csv_path)
    meta, columns, _ = read_csv(csv_path)
    kind = kind or meta.get("config", {}).get("command")
    if kind not in PLOT_KINDS:
        raise ValueError(f"no plot recipe for schema {kind!r}")
    x_col, y_cols, x_label, y_label, title = PLOT_KINDS[kind]
    missing = [c for c in [x_col, *y_cols] if c not in columns]
    if missing:
        raise ValueError(f"CSV does not match the {kind!r} schema (missing {missing})")
    script_path = Path(script_path) if script_path else csv_path.with_suffix(".plot.py")
    text = PLOT_TEMPLATE.format(
        title=title,
        csv_name=csv_path.name,
        csv_path=str(csv_path),
        x_col=x_col,
        y_cols=y_cols,
        x_label=x_label,
        y_label=y_label,
        style="o-" if kind in ("klein-scan", "boost") else "-",
        png=str(csv_path.with_suffix(".png").name),
    )
    atomic_write(script_path, text)
    return script_path
