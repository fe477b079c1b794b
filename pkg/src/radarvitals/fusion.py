"""Camera-box / radar-heatmap fusion.

The camera side of the system is reduced to its essentials: per-frame 2-D
bounding boxes in pixel coordinates.  This module tracks boxes over time,
keeps only the ones that have stopped moving, converts their horizontal
pixel extent into a window of angle bins, and picks the strongest
range-angle cell inside that window.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np


@dataclass
class Box:
    """Axis-aligned detection box; ``x``/``y`` is the top-left corner."""

    id: str
    x: float
    y: float
    w: float
    h: float

    def to_dict(self) -> dict:
        return {"id": self.id, "x": self.x, "y": self.y,
                "w": self.w, "h": self.h}


@dataclass
class DetectionFrame:
    timestamp: float
    image_width: int
    boxes: list[Box] = field(default_factory=list)


def write_detections_jsonl(frames: list[DetectionFrame], path) -> None:
    """One JSON object per line: timestamp, image width, box list."""
    with open(path, "w") as fh:
        for fr in frames:
            fh.write(json.dumps({
                "timestamp": fr.timestamp,
                "image_width": fr.image_width,
                "boxes": [b.to_dict() for b in fr.boxes],
            }, sort_keys=True))
            fh.write("\n")


def read_detections_jsonl(path) -> list[DetectionFrame]:
    frames = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            d = json.loads(line)
            frames.append(DetectionFrame(
                timestamp=d["timestamp"],
                image_width=d["image_width"],
                boxes=[Box(**b) for b in d["boxes"]],
            ))
    return frames


@dataclass
class TrackedBox:
    """Time series of one identity-tracked box."""

    id: str
    times: np.ndarray
    xs: np.ndarray
    ys: np.ndarray
    ws: np.ndarray
    hs: np.ndarray

    def __len__(self) -> int:
        return len(self.times)


def build_tracks(frames: list[DetectionFrame]) -> list[TrackedBox]:
    """Group boxes by identity across frames (ids come from the detector)."""
    acc: dict[str, list[tuple[float, float, float, float, float]]] = {}
    for fr in frames:
        for b in fr.boxes:
            acc.setdefault(b.id, []).append((fr.timestamp, b.x, b.y, b.w, b.h))
    tracks = []
    for bid in sorted(acc):
        rows = np.asarray(acc[bid], dtype=float)
        tracks.append(TrackedBox(
            id=bid, times=rows[:, 0], xs=rows[:, 1], ys=rows[:, 2],
            ws=rows[:, 3], hs=rows[:, 4]))
    return tracks


def filter_stationary(
    tracks: list[TrackedBox],
    image_width: int,
    x_threshold: float | None = None,
    w_threshold: float | None = None,
    window: float = 3.0,
) -> list[TrackedBox]:
    """Keep tracks whose box barely moved over the trailing time window.

    A track counts as stationary when, over the last ``window`` seconds of
    its samples, both the horizontal position and the width stay inside a
    max-minus-min span of the respective threshold.  Thresholds default to
    2% of the image width.  Tracks with fewer than two samples in the
    window are dropped (no evidence of stillness).
    """
    if x_threshold is None:
        x_threshold = 0.02 * image_width
    if w_threshold is None:
        w_threshold = 0.02 * image_width
    if window <= 0:
        raise ValueError("window must be positive")
    out = []
    for tr in tracks:
        if len(tr) < 2:
            continue
        t_end = tr.times[-1]
        sel = tr.times >= t_end - window
        if np.count_nonzero(sel) < 2:
            continue
        x_span = float(np.ptp(tr.xs[sel]))
        w_span = float(np.ptp(tr.ws[sel]))
        if x_span <= x_threshold and w_span <= w_threshold:
            out.append(tr)
    return out


def pixel_to_angle_window(
    x: float, w: float, image_width: int, num_angle_bins: int,
) -> tuple[int, int]:
    """Map a box's horizontal pixel span to an inclusive angle-bin window.

    Columns [0, image_width] correspond linearly to the angle grid
    [0, num_angle_bins]; the window is widened outward to whole bins
    (floor on the left edge, ceil on the right) and clamped to the grid.
    """
    if w <= 0:
        raise ValueError("box width must be positive")
    if image_width <= 0 or num_angle_bins <= 0:
        raise ValueError("image_width and num_angle_bins must be positive")
    lo = math.floor(x * num_angle_bins / image_width)
    hi = math.ceil((x + w) * num_angle_bins / image_width)
    lo = max(0, min(lo, num_angle_bins - 1))
    hi = max(0, min(hi, num_angle_bins - 1))
    if hi < lo:
        lo, hi = hi, lo
    return lo, hi


@dataclass(frozen=True)
class TargetLocation:
    range_bin: int
    angle_bin: int
    range_m: float
    angle_deg: float
    power: float


def localize(heatmap, window: tuple[int, int],
             max_range: float = 10.0) -> TargetLocation:
    """Strongest heatmap cell inside an angle window, ranges <= max_range.

    Ties resolve to the smaller range bin, then the smaller angle bin.
    ``heatmap`` needs ``power`` (R x A), ``range_axis`` and ``angle_axis``
    attributes (see :func:`radarvitals.aoa.range_angle_heatmap`).
    """
    lo, hi = window
    power = np.asarray(heatmap.power)
    n_r, n_a = power.shape
    if not (0 <= lo <= hi < n_a):
        raise ValueError("angle window lies outside the heatmap grid")
    r_sel = np.flatnonzero(heatmap.range_axis <= max_range)
    if r_sel.size == 0:
        raise ValueError("no range bins at or below max_range")
    sub = power[np.ix_(r_sel, np.arange(lo, hi + 1))]
    flat = int(np.argmax(sub))            # first occurrence: row-major order
    ri, ai = divmod(flat, sub.shape[1])   # -> smaller range, then angle
    rbin = int(r_sel[ri])
    abin = lo + ai
    return TargetLocation(
        range_bin=rbin, angle_bin=abin,
        range_m=float(heatmap.range_axis[rbin]),
        angle_deg=float(heatmap.angle_axis[abin]),
        power=float(power[rbin, abin]),
    )
