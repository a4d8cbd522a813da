"""Observation files and dataset manifests.

Two interchangeable on-disk formats per channel: CSV of floats (row-major)
and 8-bit binary PGM (P5) with pixel = round(255 * value). A dataset
manifest is a JSON array of {path, label, params, seed} entries, where
`path` is one file or a list of per-channel files.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import UsageError
from .rdsim import Observation


def write_csv(values: np.ndarray, path: str | Path) -> None:
    np.savetxt(path, np.asarray(values), delimiter=",", fmt="%.17g")


def read_csv(path: str | Path) -> np.ndarray:
    return np.loadtxt(path, delimiter=",", ndmin=2)


def write_pgm(values: np.ndarray, path: str | Path) -> None:
    arr = np.asarray(values)
    if arr.min() < 0 or arr.max() > 1:
        raise UsageError("PGM output expects values in [0, 1]")
    pix = np.round(arr * 255).astype(np.uint8)
    with open(path, "wb") as fh:
        fh.write(f"P5\n{arr.shape[1]} {arr.shape[0]}\n255\n".encode("ascii"))
        fh.write(pix.tobytes())


def read_pgm(path: str | Path) -> np.ndarray:
    with open(path, "rb") as fh:
        data = fh.read()
    # Header: magic, width, height, maxval; whitespace/comment separated.
    tokens: list[bytes] = []
    i = 0
    while len(tokens) < 4:
        while i < len(data) and data[i : i + 1].isspace():
            i += 1
        if data[i : i + 1] == b"#":
            while i < len(data) and data[i] != 0x0A:
                i += 1
            continue
        start = i
        while i < len(data) and not data[i : i + 1].isspace():
            i += 1
        tokens.append(data[start:i])
    if tokens[0] != b"P5":
        raise UsageError(f"{path}: not a binary PGM (P5) file")
    width, height, maxval = (int(t) for t in tokens[1:4])
    i += 1  # single whitespace after maxval
    raster = np.frombuffer(data, dtype=np.uint8, count=width * height, offset=i)
    return raster.reshape(height, width).astype(float) / maxval


def _channel_paths(base: Path, channels: int, ext: str) -> list[Path]:
    if channels == 1:
        return [base.with_suffix(ext)]
    return [base.with_name(f"{base.stem}_c{c}{ext}") for c in range(channels)]


def write_observation(obs: Observation, base: str | Path, fmt: str = "csv") -> list[Path]:
    """Write one file per channel next to `base`; returns the paths."""
    base = Path(base)
    if fmt not in ("csv", "pgm"):
        raise UsageError(f"unknown observation format '{fmt}'")
    paths = _channel_paths(base, obs.channels, "." + fmt)
    for c, p in enumerate(paths):
        if fmt == "csv":
            write_csv(obs.values[:, :, c], p)
        else:
            write_pgm(obs.values[:, :, c], p)
    return paths


def read_observation(paths: str | Path | list) -> np.ndarray:
    """Read one or more channel files into a (K, K, o) array."""
    if isinstance(paths, (str, Path)):
        paths = [paths]
    chans = []
    for p in paths:
        p = Path(p)
        if p.suffix == ".csv":
            chans.append(read_csv(p))
        elif p.suffix == ".pgm":
            chans.append(read_pgm(p))
        else:
            raise UsageError(f"{p}: unknown observation extension")
    return np.stack(chans, axis=-1)


@dataclass
class ManifestEntry:
    path: str | list[str]
    label: str
    params: dict = field(default_factory=dict)
    seed: int | None = None

    def __post_init__(self):
        if self.label not in ("+", "-"):
            raise UsageError(f"label must be '+' or '-', got {self.label!r}")

    def to_dict(self) -> dict:
        return {"path": self.path, "label": self.label,
                "params": self.params, "seed": self.seed}


def write_manifest(entries: list[ManifestEntry], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump([e.to_dict() for e in entries], fh, indent=1)
        fh.write("\n")


def read_manifest(path: str | Path) -> list[ManifestEntry]:
    with open(path, encoding="utf-8") as fh:
        raw = json.load(fh)
    if not isinstance(raw, list):
        raise UsageError(f"{path}: manifest must be a JSON array")
    return [ManifestEntry(path=e["path"], label=e["label"],
                          params=e.get("params") or {}, seed=e.get("seed"))
            for e in raw]


def load_entry(entry: ManifestEntry, root: str | Path | None = None) -> np.ndarray:
    """Resolve an entry's file(s), optionally against the manifest directory."""
    paths = entry.path if isinstance(entry.path, list) else [entry.path]
    if root is not None:
        paths = [Path(root) / p for p in paths]
    return read_observation(paths)


def save_dataset(observations: list[Observation], out_dir: str | Path,
                 label: str, fmt: str = "csv", prefix: str = "obs",
                 manifest_name: str = "manifest.json") -> Path:
    """Write observations plus a manifest into out_dir; returns manifest path."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    entries = []
    for idx, obs in enumerate(observations):
        paths = write_observation(obs, out_dir / f"{prefix}_{idx:04d}", fmt)
        rel = [str(p.name) for p in paths]
        entries.append(ManifestEntry(
            path=rel if len(rel) > 1 else rel[0], label=label,
            params=obs.meta.get("params", {}), seed=obs.meta.get("seed")))
    manifest = out_dir / manifest_name
    write_manifest(entries, manifest)
    return manifest
