"""Fast-time FFT: raw cubes to one-sided range profiles."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.signal import get_window

from .config import RadarConfig
from .simulate import RadarCube


@dataclass
class RangeProfiles:
    """Range spectra over slow time: shape (range_bin, slow, virtual)."""

    data: np.ndarray
    range_axis: np.ndarray
    n_fft: int
    config: RadarConfig
    frame_timestamps: np.ndarray

    @property
    def num_bins(self) -> int:
        return self.data.shape[0]


def range_bin_width(cfg: RadarConfig, n_fft: int) -> float:
    """Meters spanned by one FFT bin: 1 / (n_fft * T_f * alpha)."""
    return 1.0 / (n_fft * cfg.adc_interval * cfg.chirp_slope_factor)


def range_fft(cube: RadarCube, n_fft: int | None = None,
              window: str | None = None) -> RangeProfiles:
    """FFT along fast time, keeping the non-negative-beat half spectrum.

    ``n_fft`` defaults to samples_per_chirp and must not be smaller (the
    transform may zero-pad, never truncate).  ``window`` names any scipy
    window (e.g. "hann"); None applies none.
    """
    cfg = cube.config
    n_s = cfg.samples_per_chirp
    if n_fft is None:
        n_fft = n_s
    if n_fft < n_s:
        raise ValueError(f"n_fft ({n_fft}) must be >= samples_per_chirp ({n_s})")
    data = cube.data
    if window is not None:
        data = data * get_window(window, n_s)[:, None, None]
    spectra = np.fft.fft(data, n=n_fft, axis=0)[: n_fft // 2 + 1]
    axis = np.arange(spectra.shape[0]) * range_bin_width(cfg, n_fft)
    return RangeProfiles(data=spectra, range_axis=axis, n_fft=n_fft,
                         config=cfg, frame_timestamps=cube.frame_timestamps)


def range_bin_of(range_m: float, cfg: RadarConfig, n_fft: int) -> int:
    """FFT bin whose beat frequency is closest to a nominal range."""
    if not 0 <= range_m < cfg.max_unambiguous_range:
        raise ValueError(
            f"range {range_m} m outside [0, {cfg.max_unambiguous_range:.2f}) m")
    return int(round(cfg.chirp_slope_factor * range_m * n_fft
                     * cfg.adc_interval))
