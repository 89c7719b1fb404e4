"""Factor checkpoints: one dense .npy file per factor plus a JSON manifest."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .geometry import geometry_from_tag

_MANIFEST = "manifest.json"


def save_point(directory, geometry, x) -> None:
    """Write the factors of x and enough metadata to rebuild the point."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    arrays = geometry.point_to_arrays(x)
    manifest = {
        "geometry": geometry.name,
        "rank": int(min(a.shape[-1] if a.ndim > 1 else a.shape[0] for a in arrays.values())),
        "factors": {},
    }
    for name, arr in arrays.items():
        fname = f"{name}.npy"
        np.save(directory / fname, np.asarray(arr, dtype=float))
        manifest["factors"][name] = {"file": fname, "shape": list(arr.shape)}
    with open(directory / _MANIFEST, "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_point(directory):
    """Rebuild (geometry, point) from a checkpoint directory."""
    directory = Path(directory)
    with open(directory / _MANIFEST) as fh:
        manifest = json.load(fh)
    geometry = geometry_from_tag(manifest["geometry"])
    arrays = {}
    for name, meta in manifest["factors"].items():
        arr = np.load(directory / meta["file"])
        if list(arr.shape) != meta["shape"]:
            raise ValueError(
                f"factor {name} has shape {list(arr.shape)}, "
                f"manifest says {meta['shape']}"
            )
        arrays[name] = arr
    return geometry, geometry.point_from_arrays(arrays)
