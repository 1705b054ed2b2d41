from .correspondence import (
    CorrespondenceError,
    CorrespondenceMap,
    load_correspondence,
    parse_correspondence,
    save_correspondence,
)
from .decimate import DecimationError, decimate
from .manifest import DatasetManifest, ManifestEntry, ManifestError, load_manifest
from .synth import (
    CLASSES,
    EXTERNAL_CLASSES,
    SYNTHETIC_CLASSES,
    TransformConfig,
    Transformed,
    TransformSpec,
    apply_transform,
)

__all__ = [
    "CLASSES",
    "EXTERNAL_CLASSES",
    "SYNTHETIC_CLASSES",
    "CorrespondenceError",
    "CorrespondenceMap",
    "DatasetManifest",
    "DecimationError",
    "ManifestEntry",
    "ManifestError",
    "TransformConfig",
    "TransformSpec",
    "Transformed",
    "apply_transform",
    "decimate",
    "load_correspondence",
    "load_manifest",
    "parse_correspondence",
    "save_correspondence",
]
