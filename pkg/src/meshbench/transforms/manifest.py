"""Dataset manifests: JSON listing of a null shape and its transformed versions."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .synth import CLASSES, EXTERNAL_CLASSES

ALL_LABELS = CLASSES + EXTERNAL_CLASSES
TABLE_CLASSES = (
    "isometry", "topology", "rasterization", "sampling", "holes", "micro-holes",
    "scaling", "affine", "noise", "shot-noise", "partial", "view",
)


class ManifestError(ValueError):
    pass


@dataclass(frozen=True)
class ManifestEntry:
    cls: str
    strength: int
    mesh: Path
    corr: Path
    seed: int | None = None

    @property
    def shape_id(self) -> str:
        return f"{self.cls}-{self.strength}"


@dataclass
class DatasetManifest:
    name: str
    null: Path
    entries: list[ManifestEntry] = field(default_factory=list)
    root: Path = Path(".")

    def completeness(self) -> dict:
        """Which (class, strength) cells are present; 11 x 5 is the full set."""
        present = {(e.cls, e.strength) for e in self.entries}
        classes = sorted({c for c, _ in present})
        return {
            "entries": len(self.entries),
            "classes": classes,
            "complete": len(present) >= 55,
            "missing_strengths": {c: [s for s in range(1, 6) if (c, s) not in present] for c in classes},
        }

    def to_json(self) -> str:
        def rel(p: Path) -> str:
            try:
                return str(Path(p).resolve().relative_to(self.root.resolve()))
            except ValueError:
                return str(p)

        doc = {
            "name": self.name,
            "null": rel(self.null),
            "entries": [
                {
                    "class": e.cls,
                    "strength": e.strength,
                    "mesh": rel(e.mesh),
                    "corr": rel(e.corr),
                    **({"seed": e.seed} if e.seed is not None else {}),
                }
                for e in self.entries
            ],
        }
        return json.dumps(doc, indent=2) + "\n"

    def save(self, path) -> None:
        self.root = Path(path).parent
        Path(path).write_text(self.to_json())


def load_manifest(path, check_paths: bool = True) -> DatasetManifest:
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as err:
        raise ManifestError(f"{path}: invalid JSON: {err}") from err
    root = path.parent
    if "null" not in doc:
        raise ManifestError(f"{path}: missing 'null'")
    entries = []
    for i, e in enumerate(doc.get("entries", [])):
        try:
            cls, strength = e["class"], int(e["strength"])
            mesh, corr = root / e["mesh"], root / e["corr"]
        except (KeyError, TypeError, ValueError) as err:
            raise ManifestError(f"{path}: entry {i} malformed: {err}") from err
        if cls not in ALL_LABELS:
            raise ManifestError(f"{path}: entry {i}: unknown class {cls!r}")
        if strength not in range(1, 6):
            raise ManifestError(f"{path}: entry {i}: strength {strength} not in 1..5")
        entries.append(ManifestEntry(cls, strength, mesh, corr, e.get("seed")))
    m = DatasetManifest(doc.get("name", path.stem), root / doc["null"], entries, root)
    if check_paths:
        missing = [str(p) for p in [m.null] + [q for e in entries for q in (e.mesh, e.corr)] if not Path(p).exists()]
        if missing:
            raise ManifestError(f"{path}: missing files: " + ", ".join(missing))
    return m
