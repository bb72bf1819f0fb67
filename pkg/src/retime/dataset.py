"""Rate-modified dataset generation.

Each source video gets ten interpolated speed variants: five with rates
drawn from [0.2, 1.0] (slow-downs) and five from [1.0, 3.0] (speed-ups).
Variants keep the parent's label and split, and the combined manifest is
named "<name>Rate".  Rates fall into four bins used by the per-class
robustness statistics.
"""

from __future__ import annotations

import json
import logging
from pathlib import Path

from .rand import derive_key, stable_id_hash, uniform_at
from .resample import resample_by_rate_interpolated
from .seqio import DatasetManifest, ManifestEntry, load_sequence, write_frame_dir

logger = logging.getLogger(__name__)

RATE_MIN = 0.2
RATE_MAX = 3.0
BINS = ("B1", "B2", "B3", "B4")

# fixed alternative to random rate draws; the epsilon keeps the two
# near-unit rates distinct from 1.0 and from each other at 2 decimals
GRID_RATES = (0.2, 0.4, 0.6, 0.8, 0.99, 1.01, 1.5, 2.0, 2.5, 3.0)


def bin_of_rate(rate: float) -> str:
    """Bin for a resampling rate: B1 [0.2, 0.6], B2 (0.6, 1.0],
    B3 (1.0, 2.0], B4 (2.0, 3.0].  Shared edges close on the left bin."""
    if not RATE_MIN <= rate <= RATE_MAX:
        raise ValueError(f"rate {rate} outside [{RATE_MIN}, {RATE_MAX}]")
    if rate <= 0.6:
        return "B1"
    if rate <= 1.0:
        return "B2"
    if rate <= 2.0:
        return "B3"
    return "B4"


def draw_rates(video_id: str, seed: int) -> list[float]:
    """Ten per-video rates: five in [0.2, 1.0] and five in [1.0, 3.0].

    Draws are counter-based on (seed, video_id) and candidates are skipped
    until all ten are distinct after rounding to 2 decimals, since the
    2-decimal form names the variant.
    """
    key = derive_key(seed, stable_id_hash(video_id))
    taken: set[str] = set()
    rates: list[float] = []
    counter = 0
    for lo, hi in ((RATE_MIN, 1.0), (1.0, RATE_MAX)):
        picked = 0
        while picked < 5:
            r = lo + (hi - lo) * uniform_at(key, counter)
            counter += 1
            tag = f"{r:.2f}"
            if tag in taken:
                continue
            taken.add(tag)
            rates.append(r)
            picked += 1
    return rates


def generate_rate_dataset(
    manifest: DatasetManifest,
    seed: int,
    out_dir: str | Path,
    grid: bool = False,
    frame_format: str = "png",
) -> DatasetManifest:
    """Write ten speed variants per video and return the combined manifest.

    Variant "<video_id>_r<rate:.2f>" holds the interpolated resample of its
    parent at that rate; originals are retained.  Unreadable parents are
    recorded in <out_dir>/errors.log and skipped.  Regeneration with the
    same seed is byte-identical.
    """
    if not manifest.entries:
        raise ValueError("manifest has no entries")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    variants: list[ManifestEntry] = []
    errors: list[str] = []
    for entry in manifest.entries:
        try:
            seq = load_sequence(entry.path, seq_id=entry.video_id)
        except Exception as exc:
            logger.warning("skipping %s: %s", entry.video_id, exc)
            errors.append(f"{entry.video_id}\t{exc}")
            continue
        rates = list(GRID_RATES) if grid else draw_rates(entry.video_id, seed)
        for rate in rates:
            variant_id = f"{entry.video_id}_r{rate:.2f}"
            resampled = resample_by_rate_interpolated(seq, rate)
            frame_dir = write_frame_dir(
                resampled.with_frames(resampled.frames), out / variant_id, fmt=frame_format
            )
            (frame_dir / "provenance.json").write_text(
                json.dumps(
                    {"parent": entry.video_id, "rate": rate, "bin": bin_of_rate(rate),
                     "mode": "interp"},
                    sort_keys=True,
                )
                + "\n"
            )
            variants.append(
                ManifestEntry(
                    video_id=variant_id,
                    path=str(frame_dir),
                    label=entry.label,
                    split=entry.split,
                    rate=rate,
                    parent_id=entry.video_id,
                )
            )

    if errors:
        (out / "errors.log").write_text("\n".join(errors) + "\n")
    variants.sort(key=lambda e: (e.parent_id, e.rate))
    return DatasetManifest(name=manifest.name + "Rate", entries=list(manifest.entries) + variants)
