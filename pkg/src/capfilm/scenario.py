"""Scenario files: strict JSON documents describing one experiment.

A scenario names a wire frame, a spanning class, a set of templates and an
epsilon schedule.  Unknown keys are rejected.  Shipped scenarios live in
``capfilm/scenarios`` and can be referred to by bare name.
"""

from __future__ import annotations

import json
from importlib import resources
from pathlib import Path
from typing import Annotated, Literal, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from .relaxation import SolverOptions
from .templates import Node, Template, collapsed_y_template, lens_template
from .wireframe import SpanningClass, WireFrame


class ParseError(ValueError):
    def __init__(self, msg: str, line: int, col: int):
        super().__init__(f"{msg} (line {line}, column {col})")
        self.line, self.col = line, col


class SchemaError(ValueError):
    def __init__(self, key: str, msg: str = ""):
        super().__init__(f"{key}: {msg}" if msg else key)
        self.key = key


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class WireSpec(_Strict):
    obstacles: list[tuple[float, float]]
    delta: float

    @field_validator("delta")
    @classmethod
    def _pos(cls, v):
        if not v > 0:
            raise ValueError("must be positive")
        return v


class SpanningSpec(_Strict):
    generators: list[list[int]]

    @field_validator("generators")
    @classmethod
    def _gens(cls, v):
        for g in v:
            if any(b not in (0, 1) for b in g):
                raise ValueError("entries must be 0 or 1")
            if not any(g):
                raise ValueError("zero vector")
        if len({tuple(g) for g in v}) != len(v):
            raise ValueError("duplicate generator")
        return v


class NodeSpec(_Strict):
    obstacle: int | None = None
    position: tuple[float, float] | None = None

    @model_validator(mode="after")
    def _one(self):
        if (self.obstacle is None) == (self.position is None):
            raise ValueError("give exactly one of obstacle / position")
        return self


class LensSpec(_Strict):
    kind: Literal["lens"]
    obstacles: tuple[int, int] = (0, 1)


class CollapsedYSpec(_Strict):
    kind: Literal["collapsed_y"]
    obstacles: tuple[int, int, int] = (0, 1, 2)


class SkeletonSpec(_Strict):
    kind: Literal["skeleton"]
    nodes: list[NodeSpec]
    edges: list[tuple[int, int]]
    wet_junctions: list[int] = []
    lens_edges: list[int] = []


TemplateSpec = Annotated[Union[LensSpec, CollapsedYSpec, SkeletonSpec], Field(discriminator="kind")]


class LogRange(_Strict):
    start: float
    stop: float
    num: int


class EpsilonSpec(_Strict):
    values: list[float] | None = None
    logspace: LogRange | None = None

    @model_validator(mode="after")
    def _check(self):
        vals = self.resolve()
        if any(not v > 0 for v in vals):
            raise ValueError("epsilons must be positive")
        return self

    def resolve(self) -> list[float]:
        out = list(self.values or [])
        if self.logspace is not None:
            lr = self.logspace
            if lr.num > 0:
                out += [float(x) for x in np.logspace(np.log10(lr.start), np.log10(lr.stop), lr.num)]
        return out


class SolverSpec(_Strict):
    step0: float | None = None
    max_iters: int | None = None
    grad_tol: float | None = None
    vol_tol: float | None = None
    span_check_every: int | None = None
    backtrack_factor: float | None = None
    max_seg_len: float | None = None
    seed: int | None = None
    warm_start: bool | None = None
    arc_segments: int | None = None


class ScenarioSpec(_Strict):
    name: str
    description: str = ""
    wire: WireSpec
    spanning: SpanningSpec
    templates: dict[str, TemplateSpec]
    default_template: str | None = None
    epsilons: EpsilonSpec = EpsilonSpec()
    solver: SolverSpec = SolverSpec()
    outputs: str | None = None

    @model_validator(mode="after")
    def _refs(self):
        if not self.templates:
            raise ValueError("at least one template required")
        if self.default_template is not None and self.default_template not in self.templates:
            raise ValueError(f"default_template {self.default_template!r} is not defined")
        m = len(self.wire.obstacles)
        for g in self.spanning.generators:
            if len(g) != m:
                raise ValueError("generator length differs from obstacle count")
        return self


class Scenario:
    """Validated scenario with constructed domain objects."""

    def __init__(self, spec: ScenarioSpec, path: Path | None = None):
        self.spec = spec
        self.path = path
        self.name = spec.name
        self.wire = WireFrame(np.array(spec.wire.obstacles, dtype=float), spec.wire.delta)
        self.spanning = SpanningClass(tuple(tuple(g) for g in spec.spanning.generators))
        self.epsilons = spec.epsilons.resolve()
        s = spec.solver.model_dump(exclude_none=True)
        self.arc_segments = s.pop("arc_segments", None)
        self.solver = SolverOptions(**s)
        self.templates: dict[str, Template] = {k: self._template(k, v) for k, v in spec.templates.items()}
        self.default_template = spec.default_template or next(iter(self.templates))
        self.outputs = spec.outputs

    def _template(self, name, t) -> Template:
        m = self.wire.m
        if isinstance(t, LensSpec):
            tpl = lens_template(*t.obstacles, name=name)
        elif isinstance(t, CollapsedYSpec):
            tpl = collapsed_y_template(self.wire, *t.obstacles, name=name)
        else:
            nodes = [Node(obstacle=n.obstacle, position=n.position) for n in t.nodes]
            tpl = Template(name, nodes, [tuple(e) for e in t.edges], list(t.wet_junctions), list(t.lens_edges))
        for n in tpl.nodes:
            if n.is_terminal and not 0 <= n.obstacle < m:
                raise SchemaError(f"templates.{name}", f"obstacle {n.obstacle} out of range")
        for a, b in tpl.edges:
            if not (0 <= a < len(tpl.nodes) and 0 <= b < len(tpl.nodes)):
                raise SchemaError(f"templates.{name}.edges", "node index out of range")
        if self.arc_segments:
            tpl.arc_segments = self.arc_segments
        return tpl

    def template(self, name: str | None = None) -> Template:
        name = name or self.default_template
        if name not in self.templates:
            raise KeyError(f"unknown template {name!r}; have {sorted(self.templates)}")
        return self.templates[name]


def _error_key(err) -> str:
    loc = [str(p) for p in err["loc"] if not str(p).startswith(("function-after", "tagged-union"))]
    msg = err["msg"]
    if msg.startswith("Value error, "):
        msg = msg[len("Value error, "):]
    key = ".".join(loc) if loc else "scenario"
    # report the field the way users write it (e.g. "delta", "generators: zero vector")
    last = loc[-1] if loc else key
    if last.isdigit() and len(loc) >= 2:
        last = loc[-2] if not loc[-2].isdigit() else loc[-3]
    return last, key, msg


def parse_scenario(text: str, path: Path | None = None) -> Scenario:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, exc.lineno, exc.colno) from None
    try:
        spec = ScenarioSpec.model_validate(raw)
    except ValidationError as exc:
        err = exc.errors()[0]
        last, key, msg = _error_key(err)
        if err["type"] == "extra_forbidden":
            raise SchemaError(key, "unknown key") from None
        if msg == "zero vector":
            raise SchemaError(f"{last}: zero vector") from None
        raise SchemaError(last, f"{msg} (at {key})") from None
    try:
        return Scenario(spec, path)
    except SchemaError:
        raise
    except ValueError as exc:
        raise SchemaError("scenario", str(exc)) from None


def shipped_path(name: str) -> Path:
    ref = resources.files("capfilm") / "scenarios" / f"{name}.scenario"
    return Path(str(ref))


def shipped_names() -> list[str]:
    d = Path(str(resources.files("capfilm") / "scenarios"))
    return sorted(p.stem for p in d.glob("*.scenario"))


def load_scenario(path) -> Scenario:
    """Load a scenario file, or a shipped scenario by bare name."""
    p = Path(path)
    if not p.exists() and p.suffix == "" and (shipped_path(str(path))).exists():
        p = shipped_path(str(path))
    return parse_scenario(p.read_text(), p)
