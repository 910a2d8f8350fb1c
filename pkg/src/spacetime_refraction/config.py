"""Run configuration: strict flat-JSON schema and the figure presets."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

from .dynamics import RULES, KQuadrature, SpinorPacket, ZeemanStep
from .errors import SchemaError, UnknownPreset
from .model import GaussianSpectrum, SpacetimeGrid, StepPotential
from .rays import ALPHA_QUANTUM

MODES = ("step", "spinor", "snell", "ray")
OUTPUTS = ("heatmap", "csv", "report")
NORMALIZATIONS = ("global-max", "per-frame-max")

_EQUAL = 1.0 / math.sqrt(2.0)

PRESETS: dict[str, dict] = {
    "fig2": {
        "mode": "step",
        "k0": 2.35, "dk": 0.1, "x0": -30.0, "v1": 0.0, "v2": 2.5,
        "x_min": -100.0, "x_max": 60.0, "nx": 1201,
        "t_min": 0.0, "t_max": 40.0, "nt": 600,
    },
    "fig3": {
        "mode": "step",
        "k0": 2.35, "dk": 0.5, "x0": -30.0, "v1": 0.0, "v2": 2.5,
        "x_min": -150.0, "x_max": 150.0, "nx": 1201,
        "t_min": 0.0, "t_max": 40.0, "nt": 600,
    },
    "fig4": {
        "mode": "spinor",
        "k0": 3.5, "dk": 0.1, "x0": -30.0, "mu_b": 2.5,
        "weight_up": _EQUAL, "weight_down": _EQUAL,
        "x_min": -110.0, "x_max": 130.0, "nx": 1201,
        "t_min": 0.0, "t_max": 30.0, "nt": 600,
    },
}

DEFAULTS = {
    "v1": 0.0, "v2": 0.0, "mu_b": 0.0,
    "weight_up": _EQUAL, "weight_down": _EQUAL,
    "x_min": -100.0, "x_max": 60.0, "nx": 1201,
    "t_min": 0.0, "t_max": 40.0, "nt": 600,
    "k_lo": None, "k_hi": None, "n_nodes": 1024, "rule": "gauss-legendre",
    "outputs": [],
    "theta1_deg": 45.0, "alpha_v": ALPHA_QUANTUM,
    "gamma": 0.5, "normalization": "global-max", "overlay_rays": True,
    "distance_L": None,
}

KEYS = frozenset(["mode", "preset", "k0", "dk", "x0"]) | frozenset(DEFAULTS)


@dataclass(frozen=True)
class HeatmapSpec:
    width_px: int
    height_px: int
    gamma: float = 0.5
    overlay_rays: bool = True
    overlay_color: str = "white"
    normalization: str = "global-max"

    def __post_init__(self):
        if not (self.gamma > 0 and math.isfinite(self.gamma)):
            raise ValueError(f"gamma must be positive, got {self.gamma}")
        if self.overlay_color != "white":
            raise ValueError("only white overlays are supported")
        if self.normalization not in NORMALIZATIONS:
            raise ValueError(f"normalization must be one of {NORMALIZATIONS}")

    @classmethod
    def for_grid(cls, grid: SpacetimeGrid, **kwargs) -> "HeatmapSpec":
        return cls(grid.nx, grid.nt, **kwargs)


@dataclass(frozen=True)
class RunConfig:
    mode: str
    packet: GaussianSpectrum
    step: StepPotential
    spinor: SpinorPacket
    zeeman: ZeemanStep
    grid: SpacetimeGrid
    quad: KQuadrature
    outputs: tuple[str, ...]
    heatmap: HeatmapSpec
    theta1: float
    alpha_v: float
    distance_L: float
    preset: str | None = None
    raw: dict = field(default_factory=dict, compare=False, repr=False)

    def as_dict(self) -> dict:
        """Fully resolved parameters, suitable for the reproducibility record."""
        return dict(self.raw)


def _number(raw: dict, key: str) -> float:
    value = raw[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise SchemaError(key, f"expected a number, got {value!r}")
    if not math.isfinite(value):
        raise SchemaError(key, "must be finite")
    return float(value)


def _integer(raw: dict, key: str) -> int:
    value = raw[key]
    if isinstance(value, bool) or not isinstance(value, int):
        if isinstance(value, float) and value.is_integer():
            return int(value)
        raise SchemaError(key, f"expected an integer, got {value!r}")
    return value


def _complex(raw: dict, key: str) -> complex:
    value = raw[key]
    if isinstance(value, list):
        if len(value) != 2:
            raise SchemaError(key, "complex weights are written as [re, im]")
        parts = {f"{key}[0]": value[0], f"{key}[1]": value[1]}
        return complex(_number(parts, f"{key}[0]"), _number(parts, f"{key}[1]"))
    return complex(_number(raw, key), 0.0)


def _choice(raw: dict, key: str, allowed) -> str:
    value = raw[key]
    if value not in allowed:
        raise SchemaError(key, f"must be one of {list(allowed)}, got {value!r}")
    return value


def resolve(doc: dict) -> dict:
    """Merge defaults, the optional preset and explicit keys (in that order)."""
    if not isinstance(doc, dict):
        raise SchemaError("$", "configuration must be a JSON object")
    unknown = sorted(set(doc) - KEYS)
    if unknown:
        raise SchemaError(unknown[0], "unknown key")
    merged = dict(DEFAULTS)
    preset = doc.get("preset")
    if preset is not None:
        if preset not in PRESETS:
            raise UnknownPreset(f"unknown preset {preset!r}; choose from {sorted(PRESETS)}")
        merged.update(PRESETS[preset])
    merged.update(doc)
    merged["preset"] = preset
    return merged


def build(raw: dict) -> RunConfig:
    """Validate a resolved key-value mapping into a RunConfig."""
    for key in ("mode", "k0", "dk", "x0"):
        if key not in raw:
            raise SchemaError(key, "missing required field")
    mode = _choice(raw, "mode", MODES)

    def wrap(path, fn, *args):
        try:
            return fn(*args)
        except SchemaError:
            raise
        except (ValueError, TypeError) as exc:
            raise SchemaError(path, str(exc)) from None

    packet = wrap("k0", GaussianSpectrum, _number(raw, "k0"), _number(raw, "dk"), _number(raw, "x0"))
    step = wrap("v2", StepPotential, _number(raw, "v1"), _number(raw, "v2"))
    zeeman = wrap("mu_b", ZeemanStep, _number(raw, "mu_b"))
    spinor = wrap(
        "weight_up", SpinorPacket, packet, _complex(raw, "weight_up"), _complex(raw, "weight_down")
    )
    grid = wrap(
        "x_min",
        SpacetimeGrid,
        _number(raw, "x_min"), _number(raw, "x_max"), _integer(raw, "nx"),
        _number(raw, "t_min"), _number(raw, "t_max"), _integer(raw, "nt"),
    )
    default_q = KQuadrature.for_packet(packet)
    k_lo = default_q.k_lo if raw["k_lo"] is None else _number(raw, "k_lo")
    k_hi = default_q.k_hi if raw["k_hi"] is None else _number(raw, "k_hi")
    rule = _choice(raw, "rule", RULES)
    quad = wrap("n_nodes", KQuadrature, k_lo, k_hi, _integer(raw, "n_nodes"), rule)

    outputs = raw["outputs"]
    if not isinstance(outputs, list) or any(o not in OUTPUTS for o in outputs):
        raise SchemaError("outputs", f"must be a list drawn from {list(OUTPUTS)}")
    overlay = raw["overlay_rays"]
    if not isinstance(overlay, bool):
        raise SchemaError("overlay_rays", "expected true or false")
    heatmap = wrap(
        "gamma",
        lambda: HeatmapSpec.for_grid(
            grid,
            gamma=_number(raw, "gamma"),
            overlay_rays=overlay,
            normalization=_choice(raw, "normalization", NORMALIZATIONS),
        ),
    )

    theta1_deg = _number(raw, "theta1_deg")
    if not 0 <= theta1_deg < 90:
        raise SchemaError("theta1_deg", "must lie in [0, 90)")
    distance = abs(packet.x0) if raw["distance_L"] is None else _number(raw, "distance_L")
    if distance <= 0:
        raise SchemaError("distance_L", "must be positive")

    resolved = dict(raw)
    resolved.update(k_lo=k_lo, k_hi=k_hi, distance_L=distance)
    for key in ("weight_up", "weight_down"):
        c = _complex(raw, key)
        resolved[key] = [c.real, c.imag] if c.imag else c.real
    return RunConfig(
        mode=mode,
        packet=packet,
        step=step,
        spinor=spinor,
        zeeman=zeeman,
        grid=grid,
        quad=quad,
        outputs=tuple(dict.fromkeys(outputs)),
        heatmap=heatmap,
        theta1=math.radians(theta1_deg),
        alpha_v=_number(raw, "alpha_v"),
        distance_L=distance,
        preset=raw.get("preset"),
        raw=resolved,
    )


def parse_config(text: str, **overrides) -> RunConfig:
    """Parse a flat JSON configuration document.

    ``overrides`` are applied on top of the document (after presets) and
    go through the same validation, e.g. ``parse_config(text, nx=601)``.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError("$", f"invalid JSON: {exc.msg} (line {exc.lineno})") from None
    if isinstance(doc, dict):
        doc = {**doc, **overrides}
    return build(resolve(doc))


def preset_config(name: str, **overrides) -> RunConfig:
    return build(resolve({"preset": name, **overrides}))
