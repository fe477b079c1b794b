import numpy as np
import pytest

import radarvitals as rv
from radarvitals import simulate
from radarvitals.rangefft import range_bin_of, range_fft


def test_chest_displacement_frozen_value():
    v = rv.VitalParams(breath_freq=0.25, breath_amp=4e-3,
                       heart_freq=1.2, heart_amp=3e-4)
    assert simulate.chest_displacement(0.7, v) == pytest.approx(
        0.0033107277191028665, abs=1e-18)


def test_chest_displacement_zero_at_origin():
    assert simulate.chest_displacement(0.0, rv.VitalParams()) == 0.0


def test_motion_burst_windowing():
    bursts = (rv.BodyMotion(freq=1.0, amp=2e-3, start=1.0, stop=2.0),)
    t = np.array([0.5, 1.25, 2.5])
    d = simulate.motion_displacement(t, bursts)
    assert d[0] == 0.0 and d[2] == 0.0
    assert d[1] == pytest.approx(2e-3 * np.sin(2 * np.pi * 0.25))


class TestCubeGeometry:
    def test_shape_and_timestamps(self, cfg, small_scene):
        cube = simulate.synthesize_cube(small_scene, cfg)
        frames = round(small_scene.duration * cfg.frame_rate)
        assert cube.data.shape == (cfg.samples_per_chirp,
                                   frames * cfg.chirps_per_frame,
                                   cfg.num_virtual)
        assert cube.frame_timestamps[1] == pytest.approx(cfg.frame_period)

    def test_static_beat_frequency_lands_on_expected_bin(self, cfg):
        scene = rv.Scene(statics=(rv.PointReflector(5.0, 0.0),), duration=0.5)
        cube = simulate.synthesize_cube(scene, cfg)
        prof = range_fft(cube)
        peak = int(np.argmax(np.abs(prof.data[:, 0, 0])))
        assert peak == range_bin_of(5.0, cfg, prof.n_fft)

    def test_antenna_phase_ramp_matches_steering(self, cfg):
        angle = 25.0
        scene = rv.Scene(statics=(rv.PointReflector(3.0, angle),),
                         duration=0.5)
        cube = simulate.synthesize_cube(scene, cfg)
        snap = cube.data[0, 0, :]
        step = np.angle(snap[1:] * snap[:-1].conj())
        expected = (2 * np.pi * cfg.rx_spacing / cfg.wavelength
                    * np.sin(np.deg2rad(angle)))
        assert np.allclose(step, expected, atol=1e-9)

    def test_vital_target_phase_amplitude(self, cfg):
        """Slow-time phase swings by 4*pi*A/lambda around the breath cycle."""
        vit = rv.VitalParams(breath_freq=0.25, breath_amp=4e-3,
                             heart_freq=1.2, heart_amp=0.0)
        scene = rv.Scene(targets=(rv.VitalTarget(2.0, 0.0, 1.0, vit),),
                         duration=8.0)
        cube = simulate.synthesize_cube(scene, cfg)
        prof = range_fft(cube)
        rb = range_bin_of(2.0, cfg, prof.n_fft)
        idx = np.arange(cube.num_frames) * cfg.chirps_per_frame
        phase = np.unwrap(np.angle(prof.data[rb, idx, 0]))
        swing = phase.max() - phase.min()
        expected = 2 * 4 * np.pi * 4e-3 / cfg.wavelength
        assert swing == pytest.approx(expected, rel=0.02)

    def test_mover_sweeps_range_bins(self, cfg):
        mover = rv.MovingReflector(
            waypoints=((0.0, 2.0, 0.0), (2.0, 8.0, 0.0)))
        scene = rv.Scene(movers=(mover,), duration=2.0)
        cube = simulate.synthesize_cube(scene, cfg)
        prof = range_fft(cube)
        first = int(np.argmax(np.abs(prof.data[:, 0, 0])))
        last = int(np.argmax(np.abs(prof.data[:, -1, 0])))
        t_last = ((cube.num_frames - 1) * cfg.frame_period
                  + (cfg.chirps_per_frame - 1) * cfg.pri)
        assert first == range_bin_of(2.0, cfg, prof.n_fft)
        assert last == range_bin_of(float(mover.range_at(t_last)), cfg,
                                    prof.n_fft)


class TestNoiseAndLimits:
    def test_snr_sets_noise_power(self, cfg):
        scene = rv.Scene(duration=0.5)        # empty: pure noise
        cube = simulate.synthesize_cube(scene, cfg, snr_db=20.0, seed=0)
        measured = np.mean(np.abs(cube.data) ** 2)
        assert measured == pytest.approx(10 ** (-20 / 10), rel=0.05)

    def test_noiseless_without_snr(self, cfg):
        cube = simulate.synthesize_cube(rv.Scene(duration=0.5), cfg)
        assert np.all(cube.data == 0)

    def test_same_seed_same_cube(self, cfg, small_scene):
        a = simulate.synthesize_cube(small_scene, cfg, snr_db=10.0, seed=42)
        b = simulate.synthesize_cube(small_scene, cfg, snr_db=10.0, seed=42)
        assert np.array_equal(a.data, b.data)

    def test_rejects_range_beyond_beat_nyquist(self, cfg):
        bad = rv.Scene(statics=(rv.PointReflector(
            cfg.max_unambiguous_range + 1.0, 0.0),), duration=0.5)
        with pytest.raises(ValueError, match="Nyquist"):
            simulate.synthesize_cube(bad, cfg)

    def test_rejects_mover_leaving_unambiguous_range(self, cfg):
        bad = rv.Scene(movers=(rv.MovingReflector(
            waypoints=((0.0, 2.0, 0.0),
                       (0.5, cfg.max_unambiguous_range + 2.0, 0.0))),),
            duration=0.5)
        with pytest.raises(ValueError, match="Nyquist"):
            simulate.synthesize_cube(bad, cfg)

    def test_tx_weights_length_checked(self, cfg, small_scene):
        with pytest.raises(ValueError, match="num_tx"):
            simulate.synthesize_cube(small_scene, cfg,
                                     tx_weights=np.ones(5))


def test_illumination_gain_scales_scatterer(cfg):
    """Steering the transmit pair at the scatterer doubles its amplitude."""
    scene = rv.Scene(statics=(rv.PointReflector(3.0, 20.0),), duration=0.5)
    plain = simulate.synthesize_cube(scene, cfg)
    from radarvitals.beamform import tx_weights
    tx = tx_weights(20.0, cfg.wavelength, num_elements=cfg.num_tx,
                    spacing=cfg.tx_spacing)
    boosted = simulate.synthesize_cube(scene, cfg, tx_weights=tx)
    ratio = np.abs(boosted.data[0, 0, 0]) / np.abs(plain.data[0, 0, 0])
    assert ratio == pytest.approx(cfg.num_tx, rel=1e-9)


def test_cube_dump_load_round_trip(tmp_path, cfg):
    scene = rv.Scene(statics=(rv.PointReflector(3.0, 10.0),), duration=0.5)
    cube = simulate.synthesize_cube(scene, cfg, snr_db=15.0, seed=3)
    path = tmp_path / "cube.bin"
    cube.dump(path)
    again = simulate.RadarCube.load(path)
    assert again.data.shape == cube.data.shape
    assert again.config == cfg
    # complex64 on disk: equality up to single precision
    assert np.allclose(again.data, cube.data, atol=1e-5)


class TestDetections:
    def test_center_mapping_is_linear(self):
        scene = rv.Scene(targets=(rv.VitalTarget(2.0, 30.0),), duration=1.0)
        cam = rv.CameraConfig(jitter_px=0.0)
        frames = simulate.synthesize_detections(scene, cam, frame_rate=20.0,
                                                seed=0)
        box = frames[0].boxes[0]
        expected_center = (30.0 + 60.0) / 120.0 * 1920
        assert box.x + box.w / 2 == pytest.approx(expected_center)
        assert box.id == "target-0"

    def test_out_of_view_scatterers_make_no_boxes(self):
        scene = rv.Scene(targets=(rv.VitalTarget(2.0, 30.0),),
                         movers=(rv.MovingReflector(
                             waypoints=((0.0, 3.0, 80.0),)),),
                         duration=1.0)
        cam = rv.CameraConfig(afov_deg=60.0, jitter_px=0.0)
        frames = simulate.synthesize_detections(scene, cam, frame_rate=20.0,
                                                seed=0)
        assert all(len(f.boxes) == 1 for f in frames)

    def test_mover_box_follows_trajectory(self):
        scene = rv.Scene(movers=(rv.MovingReflector(
            waypoints=((0.0, 3.0, -30.0), (1.0, 3.0, 30.0))),), duration=1.0)
        cam = rv.CameraConfig(jitter_px=0.0)
        frames = simulate.synthesize_detections(scene, cam, frame_rate=10.0,
                                                seed=0)
        xs = [f.boxes[0].x for f in frames]
        assert xs == sorted(xs)
        assert frames[0].boxes[0].id == "mover-0"

    def test_jitter_is_seeded(self):
        scene = rv.Scene(targets=(rv.VitalTarget(2.0, 0.0),), duration=2.0)
        cam = rv.CameraConfig(jitter_px=2.0)
        a = simulate.synthesize_detections(scene, cam, frame_rate=20.0, seed=5)
        b = simulate.synthesize_detections(scene, cam, frame_rate=20.0, seed=5)
        assert all(x.boxes[0].x == y.boxes[0].x for x, y in zip(a, b))

    def test_requires_a_frame_rate(self):
        with pytest.raises(ValueError):
            simulate.synthesize_detections(rv.Scene(duration=1.0),
                                           rv.CameraConfig(), seed=0)
