"""Parsing of CLI/config values and deterministic file output."""
from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .errors import ConfigError
from .fock import FieldState
from .phase_space import GridSpec

_PI_RE = re.compile(r"^\s*([+-]?(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?)?\s*\*?\s*(pi|π)?\s*$")


def parse_pi_multiple(text: str) -> float:
    """``'3.7pi'`` -> 3.7*pi. A bare number is also read as a multiple of pi."""
    m = _PI_RE.match(str(text))
    if not m or (m.group(1) is None and m.group(2) is None):
        raise ConfigError(f"cannot parse {text!r} as a multiple of pi (expected e.g. '3.7pi')")
    coef = float(m.group(1)) if m.group(1) is not None else 1.0
    return coef * math.pi


def parse_pi_list(text: str) -> list[float]:
    items = [t for t in str(text).split(",") if t.strip()]
    if not items:
        raise ConfigError("empty list of interaction times")
    return [parse_pi_multiple(t) for t in items]


def parse_complex(text) -> complex:
    if isinstance(text, (int, float, complex)):
        return complex(text)
    try:
        return complex(str(text).replace(" ", "").replace("i", "j"))
    except ValueError as exc:
        raise ConfigError(f"cannot parse {text!r} as a complex number") from exc


def parse_grid(text: str) -> GridSpec:
    """``'xmin,xmax,ymin,ymax,step'`` or ``'half_width,step'``."""
    try:
        parts = [float(p) for p in str(text).split(",")]
    except ValueError as exc:
        raise ConfigError(f"bad grid spec {text!r}") from exc
    try:
        if len(parts) == 2:
            return GridSpec.square(*parts)
        if len(parts) == 5:
            return GridSpec(*parts)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    raise ConfigError(f"grid spec {text!r} needs 2 or 5 comma-separated numbers")


@dataclass
class ScenarioConfig:
    alpha: complex
    gts: list
    n_max_override: Optional[int] = None
    grid: Optional[GridSpec] = None
    probe: dict = field(default_factory=dict)
    damping: dict = field(default_factory=dict)

    @classmethod
    def from_mapping(cls, doc: dict) -> "ScenarioConfig":
        def need(key):
            if key not in doc:
                raise ConfigError(f"config field '{key}' is required")
            return doc[key]

        alpha = doc.get("alpha")
        if alpha is None and "alpha_mag" in doc:
            alpha = float(doc["alpha_mag"]) * complex(math.cos(float(doc.get("alpha_phase", 0.0))),
                                                      math.sin(float(doc.get("alpha_phase", 0.0))))
        if alpha is None:
            need("alpha")
        gts = need("gts")
        gts = parse_pi_list(gts) if isinstance(gts, str) else [parse_pi_multiple(g) for g in gts]
        grid = doc.get("grid")
        if isinstance(grid, str):
            grid = parse_grid(grid)
        elif isinstance(grid, dict):
            try:
                grid = GridSpec(**grid)
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"config field 'grid': {exc}") from exc
        n_max = doc.get("n_max_override")
        return cls(
            alpha=parse_complex(alpha),
            gts=gts,
            n_max_override=int(n_max) if n_max is not None else None,
            grid=grid,
            probe=dict(doc.get("probe") or {}),
            damping=dict(doc.get("damping") or {}),
        )

    @classmethod
    def load(cls, path) -> "ScenarioConfig":
        text = Path(path).read_text()
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
        if not isinstance(doc, dict):
            raise ConfigError(f"{path}: top level must be an object")
        return cls.from_mapping(doc)


def dumps(doc) -> str:
    return json.dumps(doc, indent=1, sort_keys=True) + "\n"


def write_text(path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)


def state_document(state: FieldState, metadata: dict) -> dict:
    doc = state.to_json()
    doc["metadata"] = metadata
    return doc


def read_state_file(path) -> tuple[FieldState, dict]:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: line {exc.lineno}: {exc.msg}") from exc
    except OSError as exc:
        raise ConfigError(f"cannot read state file: {exc}") from exc
    return FieldState.from_json(doc), dict(doc.get("metadata") or {})
