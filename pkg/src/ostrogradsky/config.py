"""Flat ``key = value`` run configuration.

Blank lines and ``#`` comments are ignored. Recognised keys::

    model             oscillator | gravwave-mode
    m, h1, h2, h3     oscillator mass and spring constants (h sets all three)
    lambda            oscillator time constant
    c, k              wave speed and wavenumber of the mode model
    dt, steps         time step and number of steps
    mode              free | projected
    projection_every  project every n steps
    output, format    output path and csv | json
    seed              seed for random initial states
"""

from dataclasses import dataclass, field

from .errors import StructureError

MODEL_PARAMS = {"m", "h", "h1", "h2", "h3", "lambda", "c", "k"}
RUN_KEYS = {"model", "dt", "steps", "mode", "projection_every", "output", "format", "seed"}


@dataclass
class RunConfig:
    model: str = "oscillator"
    params: dict = field(default_factory=dict)
    dt: float = 1e-3
    steps: int = 1000
    mode: str = "free"
    projection_every: int = 1
    output: str = None
    format: str = "csv"
    seed: int = 0

    def validate(self):
        if not self.dt > 0:
            raise StructureError("dt", f"must be positive, got {self.dt}")
        if self.steps < 1:
            raise StructureError("steps", f"must be at least 1, got {self.steps}")
        if self.mode not in ("free", "projected"):
            raise StructureError("mode", f"expected free or projected, got {self.mode!r}")
        if self.projection_every < 1:
            raise StructureError("projection_every", "must be at least 1")
        if self.format not in ("csv", "json"):
            raise StructureError("format", f"expected csv or json, got {self.format!r}")
        return self


def parse_config_text(text):
    """Parse ``key = value`` lines into a dict of strings."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise StructureError("config", f"line {lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in MODEL_PARAMS | RUN_KEYS:
            raise StructureError("config", f"line {lineno}: unknown key {key!r}")
        out[key] = value
    return out


def load_config(path):
    with open(path) as fh:
        return parse_config_text(fh.read())


def parse_param(item):
    """``"key=value"`` -> ``(key, float)``."""
    if "=" not in item:
        raise StructureError("param", f"expected key=value, got {item!r}")
    key, value = (s.strip() for s in item.split("=", 1))
    try:
        return key, float(value)
    except ValueError:
        raise StructureError("param", f"{key}: not a number: {value!r}") from None


def build_run_config(file_values=None, overrides=None, params=None):
    """Merge config-file values with flag overrides; flags win."""
    merged = dict(file_values or {})
    merged.update({k: v for k, v in (overrides or {}).items() if v is not None})
    cfg = RunConfig()
    model_params = {}
    for key, value in merged.items():
        if key in MODEL_PARAMS:
            model_params[key] = float(value)
        elif key in ("dt",):
            cfg.dt = float(value)
        elif key in ("steps", "projection_every", "seed"):
            setattr(cfg, key, int(value))
        else:
            setattr(cfg, key, value)
    model_params.update(params or {})
    cfg.params = model_params
    return cfg.validate()
