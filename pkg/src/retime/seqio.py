"""File formats: frame directories, raw sequence containers, model files,
and dataset manifests.

Frame directories hold zero-padded 8-bit image files (frame_000001.png);
interpolated values are quantized round-half-up into [0, 255] only at this
boundary.  The raw container is a minimal headered blob (magic TRSQ) for
headless round-trip tests without any image codec.  Classifier weights go
into a small self-describing binary (magic TRCM) with a JSON sidecar.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

from .frames import FrameSequence

RAW_MAGIC = b"TRSQ"
MODEL_MAGIC = b"TRCM"
MODEL_VERSION = 1

FRAME_PATTERN = "frame_{:06d}.{ext}"


def quantize_u8(arr: np.ndarray) -> np.ndarray:
    """Round half up and clamp into [0, 255]."""
    return np.clip(np.floor(arr + 0.5), 0.0, 255.0).astype(np.uint8)


def write_frame_dir(seq: FrameSequence, out_dir: str | Path, fmt: str = "png") -> Path:
    """Write a sequence as zero-padded 8-bit image files; returns the dir."""
    if fmt not in ("png", "ppm"):
        raise ValueError(f"fmt must be png or ppm, got {fmt!r}")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    data = quantize_u8(seq.frames)
    c = data.shape[3]
    if c == 1:
        mode_data = data[:, :, :, 0]
    elif c == 3:
        mode_data = data
    else:
        raise ValueError(f"image files support 1 or 3 channels, got {c}")
    for i in range(data.shape[0]):
        Image.fromarray(mode_data[i]).save(out / FRAME_PATTERN.format(i + 1, ext=fmt))
    return out


def read_frame_dir(path: str | Path, seq_id: str | None = None) -> FrameSequence:
    """Load a frame directory written by write_frame_dir (PNG or PPM)."""
    p = Path(path)
    files = sorted(f for f in p.iterdir() if f.suffix.lower() in (".png", ".ppm"))
    if not files:
        raise ValueError(f"no frame files in {p}")
    frames = []
    shape = None
    for f in files:
        arr = np.asarray(Image.open(f), dtype=np.float64)
        if arr.ndim == 2:
            arr = arr[:, :, np.newaxis]
        if shape is None:
            shape = arr.shape
        elif arr.shape != shape:
            raise ValueError(f"frame {f.name} has shape {arr.shape}, expected {shape}")
        frames.append(arr)
    return FrameSequence(seq_id if seq_id is not None else p.name, np.stack(frames))


def write_raw(seq: FrameSequence, path: str | Path) -> Path:
    """Write the TRSQ container: magic, u32 H W C N little-endian, u8 data."""
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    n, h, w, c = seq.frames.shape
    with open(p, "wb") as fh:
        fh.write(RAW_MAGIC)
        fh.write(struct.pack("<IIII", h, w, c, n))
        fh.write(quantize_u8(seq.frames).tobytes())
    return p


def read_raw(path: str | Path, seq_id: str | None = None) -> FrameSequence:
    p = Path(path)
    blob = p.read_bytes()
    if blob[:4] != RAW_MAGIC:
        raise ValueError(f"{p} is not a TRSQ container")
    h, w, c, n = struct.unpack("<IIII", blob[4:20])
    expected = n * h * w * c
    data = np.frombuffer(blob, dtype=np.uint8, count=expected, offset=20)
    if data.size != expected:
        raise ValueError(f"{p} is truncated: expected {expected} pixels")
    frames = data.reshape(n, h, w, c).astype(np.float64)
    return FrameSequence(seq_id if seq_id is not None else p.stem, frames)


def load_sequence(path: str | Path, seq_id: str | None = None) -> FrameSequence:
    """Load either a frame directory or a TRSQ container file."""
    p = Path(path)
    if p.is_dir():
        return read_frame_dir(p, seq_id)
    if p.is_file():
        return read_raw(p, seq_id)
    raise FileNotFoundError(f"no sequence at {p}")


# --- manifests ---------------------------------------------------------------


@dataclass
class ManifestEntry:
    video_id: str
    path: str
    label: str
    split: str
    rate: float | None = None
    parent_id: str | None = None


@dataclass
class DatasetManifest:
    name: str
    entries: list[ManifestEntry]


def write_manifest(manifest: DatasetManifest, path: str | Path) -> Path:
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    lines = [f"# name: {manifest.name}"]
    for e in manifest.entries:
        fields = [e.video_id, e.path, e.label, e.split]
        if e.rate is not None:
            fields.append(repr(e.rate))
            fields.append(e.parent_id if e.parent_id is not None else "")
        lines.append("\t".join(fields))
    p.write_text("\n".join(lines) + "\n")
    return p


def read_manifest(path: str | Path) -> DatasetManifest:
    p = Path(path)
    name = p.stem
    entries = []
    for lineno, line in enumerate(p.read_text().splitlines(), start=1):
        if not line.strip():
            continue
        if line.startswith("#"):
            if line.startswith("# name:"):
                name = line.split(":", 1)[1].strip()
            continue
        fields = line.split("\t")
        if len(fields) < 4:
            raise ValueError(f"{p}:{lineno}: manifest rows need at least 4 fields")
        entry = ManifestEntry(*fields[:4])
        if len(fields) >= 5 and fields[4]:
            entry.rate = float(fields[4])
        if len(fields) >= 6 and fields[5]:
            entry.parent_id = fields[5]
        entries.append(entry)
    seen: set[str] = set()
    for e in entries:
        if e.video_id in seen:
            raise ValueError(f"duplicate video_id {e.video_id!r} in {p}")
        seen.add(e.video_id)
    return DatasetManifest(name=name, entries=entries)


# --- model files -------------------------------------------------------------


def save_model_file(
    path: str | Path,
    weights: np.ndarray,
    bias: np.ndarray,
    input_len: int,
    trained_config: str,
    extra: dict | None = None,
) -> Path:
    """Write weights/bias as the TRCM binary plus a JSON metadata sidecar."""
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    num_classes, input_dim = weights.shape
    with open(p, "wb") as fh:
        fh.write(MODEL_MAGIC)
        fh.write(struct.pack("<IIII", MODEL_VERSION, num_classes, input_dim, input_len))
        fh.write(np.ascontiguousarray(weights, dtype="<f8").tobytes())
        fh.write(np.ascontiguousarray(bias, dtype="<f8").tobytes())
    meta = {"trained_config": trained_config, "num_classes": num_classes,
            "input_dim": input_dim, "input_len": input_len}
    meta.update(extra or {})
    Path(str(p) + ".json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    return p


def load_model_file(path: str | Path) -> tuple[np.ndarray, np.ndarray, int, dict]:
    """Read a TRCM file; returns (weights, bias, input_len, metadata)."""
    p = Path(path)
    blob = p.read_bytes()
    if blob[:4] != MODEL_MAGIC:
        raise ValueError(f"{p} is not a TRCM model file")
    version, num_classes, input_dim, input_len = struct.unpack("<IIII", blob[4:20])
    if version != MODEL_VERSION:
        raise ValueError(f"unsupported model file version {version}")
    w_bytes = num_classes * input_dim * 8
    weights = np.frombuffer(blob, dtype="<f8", count=num_classes * input_dim, offset=20)
    weights = weights.reshape(num_classes, input_dim).copy()
    bias = np.frombuffer(blob, dtype="<f8", count=num_classes, offset=20 + w_bytes).copy()
    sidecar = Path(str(p) + ".json")
    meta = json.loads(sidecar.read_text()) if sidecar.exists() else {}
    return weights, bias, input_len, meta
