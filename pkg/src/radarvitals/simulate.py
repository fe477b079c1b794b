"""Synthetic FMCW radar-cube and camera-detection generation.

The simulator evaluates the dechirped baseband model directly: each
scatterer contributes a complex tone across fast time (beat frequency
proportional to range), a phase history across slow time (carrying the
two-way path length, including chest micro-motion for vital targets), and a
linear phase ramp across the virtual receive array.  Cubes are indexed
``[fast_sample, slow_sample, virtual_antenna]``.

Transmit beamforming is modeled as a per-scatterer illumination gain: with
steering weights ``w`` the field hitting a scatterer at azimuth theta scales
by ``w^H a_tx(theta)``, where ``a_tx`` is the transmit-array steering vector.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .config import BodyMotion, CameraConfig, RadarConfig, Scene, VitalParams
from .fusion import Box, DetectionFrame


def chest_displacement(t, vitals: VitalParams):
    """Chest displacement in meters at time(s) ``t``.

    Sum of the breathing and heartbeat sinusoids plus any body-motion
    bursts; both components start at zero phase.
    """
    t = np.asarray(t, dtype=float)
    d = (vitals.breath_amp * np.sin(2.0 * np.pi * vitals.breath_freq * t)
         + vitals.heart_amp * np.sin(2.0 * np.pi * vitals.heart_freq * t))
    return d + motion_displacement(t, vitals.body_motion)


def motion_displacement(t, bursts: tuple[BodyMotion, ...]):
    """Displacement from windowed sinusoidal bursts (zero outside windows)."""
    t = np.asarray(t, dtype=float)
    d = np.zeros_like(t)
    for b in bursts:
        on = (t >= b.start) & (t < b.stop)
        d[on] += b.amp * np.sin(2.0 * np.pi * b.freq * (t[on] - b.start))
    return d


@dataclass
class RadarCube:
    """Raw dechirped samples: shape (samples_per_chirp, slow, virtual)."""

    data: np.ndarray
    config: RadarConfig
    frame_timestamps: np.ndarray

    @property
    def num_frames(self) -> int:
        return len(self.frame_timestamps)

    def dump(self, path) -> None:
        """Write interleaved float32 I/Q plus a JSON sidecar (``<path>.json``)."""
        path = Path(path)
        flat = np.ascontiguousarray(self.data.astype(np.complex64))
        flat.view(np.float32).tofile(path)
        meta = {
            "dtype": "complex64-interleaved-float32",
            "shape": list(self.data.shape),
            "config": self.config.to_dict(),
            "frame_timestamps": self.frame_timestamps.tolist(),
        }
        with open(path.with_suffix(path.suffix + ".json"), "w") as fh:
            json.dump(meta, fh, sort_keys=True, indent=2)

    @classmethod
    def load(cls, path) -> "RadarCube":
        path = Path(path)
        with open(path.with_suffix(path.suffix + ".json")) as fh:
            meta = json.load(fh)
        raw = np.fromfile(path, dtype=np.float32).view(np.complex64)
        data = raw.reshape(meta["shape"]).astype(np.complex128)
        return cls(data=data, config=RadarConfig.from_dict(meta["config"]),
                   frame_timestamps=np.asarray(meta["frame_timestamps"]))


def _slow_times(cfg: RadarConfig, duration: float):
    """Global chirp-start times; chirps within a frame sit ``pri`` apart."""
    n_frames = int(round(duration * cfg.frame_rate))
    if n_frames < 1:
        raise ValueError("duration too short for a single frame")
    frame_t = np.arange(n_frames) * cfg.frame_period
    slow_t = (frame_t[:, None] + np.arange(cfg.chirps_per_frame) * cfg.pri)
    return frame_t, slow_t.ravel()


def _illumination(angles_deg, tx_weights, cfg: RadarConfig):
    """Transmit-array gain ``w^H a_tx(theta)`` per scatterer angle."""
    if tx_weights is None:
        return np.ones_like(np.asarray(angles_deg, dtype=float),
                            dtype=np.complex128)
    w = np.asarray(getattr(tx_weights, "weights", tx_weights),
                   dtype=np.complex128)
    if w.shape != (cfg.num_tx,):
        raise ValueError(
            f"tx_weights must have length num_tx={cfg.num_tx}, got {w.shape}")
    sin_t = np.sin(np.deg2rad(np.asarray(angles_deg, dtype=float)))
    phase = (2.0 * np.pi * cfg.tx_spacing / cfg.wavelength
             * np.outer(sin_t, np.arange(cfg.num_tx)))
    return np.exp(1j * phase) @ w.conj()


def _check_beat(cfg: RadarConfig, r_max: float) -> None:
    if cfg.chirp_slope_factor * r_max >= cfg.beat_nyquist:
        raise ValueError(
            f"scene range {r_max:.2f} m puts the beat frequency at or above "
            f"the fast-time Nyquist limit ({cfg.max_unambiguous_range:.2f} m)")


def synthesize_cube(
    scene: Scene,
    cfg: RadarConfig,
    tx_weights=None,
    snr_db: float | None = None,
    seed=None,
) -> RadarCube:
    """Render a scene into a radar cube.

    Parameters
    ----------
    tx_weights : array-like or BeamWeights, optional
        Transmit steering weights (length ``cfg.num_tx``); applied as an
        illumination gain on every scatterer.
    snr_db : float, optional
        Per-sample SNR of a unit-amplitude scatterer against the added
        circular complex white noise.  ``None`` leaves the cube noiseless.
    seed : int, numpy Generator, or None
        Noise randomness; ignored when ``snr_db`` is None.
    """
    frame_t, slow_t = _slow_times(cfg, scene.duration)
    n_fast = cfg.samples_per_chirp
    n_slow = slow_t.size
    n_ant = cfg.num_virtual
    lam = cfg.wavelength
    alpha = cfg.chirp_slope_factor

    fast_t = np.arange(n_fast) * cfg.adc_interval
    k = np.arange(n_ant)
    ant_factor = 2.0 * np.pi * cfg.rx_spacing / lam

    cube = np.zeros((n_fast, n_slow, n_ant), dtype=np.complex128)

    for s in scene.statics:
        _check_beat(cfg, s.range_m)
        g = complex(_illumination([s.angle_deg], tx_weights, cfg)[0])
        fast = np.exp(2j * np.pi * alpha * s.range_m * fast_t)
        ant = np.exp(1j * ant_factor * np.sin(np.deg2rad(s.angle_deg)) * k)
        amp = s.amplitude * g * np.exp(4j * np.pi * s.range_m / lam)
        cube += (amp * fast)[:, None, None] * ant[None, None, :]

    for tgt in scene.targets:
        _check_beat(cfg, tgt.range_m)
        g = complex(_illumination([tgt.angle_deg], tx_weights, cfg)[0])
        fast = np.exp(2j * np.pi * alpha * tgt.range_m * fast_t)
        dr = chest_displacement(slow_t, tgt.vitals)
        slow = np.exp(4j * np.pi * (tgt.range_m + dr) / lam)
        ant = np.exp(1j * ant_factor * np.sin(np.deg2rad(tgt.angle_deg)) * k)
        block = (tgt.amplitude * g) * np.multiply.outer(fast, slow)
        cube += block[:, :, None] * ant[None, None, :]

    for mv in scene.movers:
        r_m = np.asarray(mv.range_at(slow_t), dtype=float)
        r_m = r_m + motion_displacement(slow_t, mv.body_motion)
        _check_beat(cfg, float(np.max(r_m)))
        th_m = np.asarray(mv.angle_at(slow_t), dtype=float)
        a_m = np.asarray(mv.amplitude_at(slow_t), dtype=float)
        g_m = _illumination(th_m, tx_weights, cfg)
        fast_slow = np.exp(2j * np.pi * alpha * cfg.adc_interval
                           * np.outer(np.arange(n_fast), r_m))
        ant_slow = np.exp(1j * ant_factor
                          * np.outer(np.sin(np.deg2rad(th_m)), k))
        ant_slow *= (a_m * g_m * np.exp(4j * np.pi * r_m / lam))[:, None]
        cube += fast_slow[:, :, None] * ant_slow[None, :, :]

    if snr_db is not None:
        rng = np.random.default_rng(seed)
        sigma = np.sqrt(0.5 * 10.0 ** (-snr_db / 10.0))
        cube += sigma * (rng.standard_normal(cube.shape)
                         + 1j * rng.standard_normal(cube.shape))

    return RadarCube(data=cube, config=cfg, frame_timestamps=frame_t)


def synthesize_detections(
    scene: Scene,
    camera: CameraConfig,
    frame_rate: float | None = None,
    seed=None,
) -> list[DetectionFrame]:
    """Generate per-frame bounding boxes for every person-like scatterer.

    Vital targets and movers whose azimuth falls inside the camera field of
    view get one box each; box centers follow the true azimuth through the
    linear angle-to-column map, with Gaussian pixel jitter on the corner
    coordinates.  Identities are stable (``target-<i>`` / ``mover-<i>``),
    mimicking an upstream tracker.  Static clutter produces no boxes.
    """
    fps = camera.fps if camera.fps is not None else frame_rate
    if fps is None or fps <= 0:
        raise ValueError("camera fps (or frame_rate fallback) must be positive")
    rng = np.random.default_rng(seed)
    n_frames = int(round(scene.duration * fps))
    width, height = camera.image_width, camera.image_height
    afov = camera.afov_deg
    bw, bh = camera.box_width_px, camera.box_height_px
    y_base = 0.5 * (height - bh)

    def make_box(bid: str, angle: float) -> Box | None:
        if not (-afov <= angle <= afov):
            return None
        cx = (angle + afov) / (2.0 * afov) * width
        x = cx - 0.5 * bw + rng.normal(0.0, camera.jitter_px)
        y = y_base + rng.normal(0.0, camera.jitter_px)
        x = float(np.clip(x, 0.0, width - bw))
        y = float(np.clip(y, 0.0, height - bh))
        return Box(id=bid, x=x, y=y, w=bw, h=bh)

    frames = []
    for f in range(n_frames):
        t = f / fps
        boxes = []
        for i, tgt in enumerate(scene.targets):
            b = make_box(f"target-{i}", tgt.angle_deg)
            if b is not None:
                boxes.append(b)
        for i, mv in enumerate(scene.movers):
            b = make_box(f"mover-{i}", float(mv.angle_at(t)))
            if b is not None:
                boxes.append(b)
        frames.append(DetectionFrame(timestamp=t, image_width=width,
                                     boxes=boxes))
    return frames
