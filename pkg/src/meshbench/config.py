"""Run configuration shared by the command-line stages."""

from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

from .descriptors import DESCRIPTORS
from .detectors import DETECTORS
from .eval import EvalConfig

CACHE_ENV = "MESHBENCH_CACHE"
DEFAULT_DETECTORS = ("harris3d-ring1",)


@dataclass
class RunConfig:
    """Everything a pipeline run depends on.

    ``detectors`` and ``descriptors`` map registry names to keyword
    parameters. Descriptors are computed on the features of
    ``describe_on``; features without a scale use ``fallback_scale``
    (fraction of diam).
    """

    manifest: str | None = None
    detectors: dict = field(default_factory=lambda: {d: {} for d in DEFAULT_DETECTORS})
    descriptors: dict = field(default_factory=dict)
    describe_on: str = "mesh-scale-dog"
    fallback_scale: float = 0.01
    eval: EvalConfig = field(default_factory=EvalConfig)
    basis_size: int = 100
    cache: str = ".meshbench-cache"
    out: str = "out"
    jobs: int = 1
    seed: int = 0

    def __post_init__(self):
        if isinstance(self.eval, dict):
            ev = dict(self.eval)
            if ev.get("tau") is not None:
                ev["tau"] = tuple(ev["tau"])
            self.eval = EvalConfig(**ev)
        for name in self.detectors:
            if name not in DETECTORS:
                raise ValueError(f"unknown detector {name!r}; known: {', '.join(DETECTORS)}")
        for name in self.descriptors:
            if name not in DESCRIPTORS:
                raise ValueError(f"unknown descriptor {name!r}; known: {', '.join(DESCRIPTORS)}")
        if self.describe_on not in DETECTORS:
            raise ValueError(f"unknown detector {self.describe_on!r}")
        if self.jobs < 1:
            raise ValueError("jobs must be >= 1")
        if self.basis_size < 2:
            raise ValueError("basis size must be >= 2")

    @property
    def cache_dir(self) -> Path:
        return Path(os.environ.get(CACHE_ENV) or self.cache)

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text: str) -> RunConfig:
        doc = json.loads(text)
        known = {f.name for f in fields(cls)}
        unknown = set(doc) - known
        if unknown:
            raise ValueError(f"unknown RunConfig keys: {', '.join(sorted(unknown))}")
        return cls(**doc)

    @classmethod
    def load(cls, path) -> RunConfig:
        return cls.from_json(Path(path).read_text())
