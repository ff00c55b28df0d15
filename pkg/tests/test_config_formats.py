import numpy as np
import pytest

from conftest import box
from mentos.config import ConfigError, PipelineConfig, format_config, parse_config
from mentos.formats import (
    InputFormatError,
    read_detections,
    read_frames,
    read_meta,
    read_tracks,
    write_detections,
    write_frames,
    write_meta,
    write_tracks,
)
from mentos.glta import VideoMeta
from mentos.mask import compressed_rle_encode
from mentos.metrics import TrackObservation
from mentos.sta import Detection


def test_defaults_match_published_values():
    cfg = PipelineConfig()
    assert (cfg.theta_d, cfg.theta_a, cfg.theta_miou) == (0.5, 128, 0.5)
    assert (cfg.theta_s, cfg.theta_l) == (0.15, 0.30)
    assert (cfg.tau_t, cfg.tau_s, cfg.tau_o) == (1.5, 0.2, 1)
    assert (cfg.n_far, cfg.n_fallback, cfg.score_floor) == (5, 2, 0.90)


def test_parse_config_overrides():
    cfg = parse_config("# comment\ntheta_l = 0.4\ntau_o=2\npropagator = external:/tmp/h\nlong_term = false\n")
    assert cfg.theta_l == 0.4 and cfg.tau_o == 2 and cfg.propagator == "external:/tmp/h"
    assert cfg.long_term is False
    assert parse_config(format_config(cfg)) == cfg


@pytest.mark.parametrize(
    "text", ["theta_x = 1", "theta_d = 2", "theta_d 0.3", "tau_o = one", "flow_window = 4", "propagator = stm"]
)
def test_config_errors(text):
    with pytest.raises(ConfigError):
        parse_config(text)


def test_detection_roundtrip(tmp_path):
    m1, m2 = box(20, 30, 2, 2, 8, 9), box(20, 30, 10, 10, 15, 20)
    dets = {0: [Detection(0, m1, {3: 0.75})], 4: [Detection(4, m2, {1: 0.5}), Detection(4, m1, {2: 1.0})]}
    p = tmp_path / "dets.txt"
    write_detections(p, dets)
    first = p.read_text().splitlines()[0]
    assert first == f"0 3 0.750000 20 30 {compressed_rle_encode(m1)}"
    assert read_detections(p) == dets


def test_detection_errors_name_lines(tmp_path):
    m = box(20, 30, 2, 2, 8, 9)
    good = f"0 1 0.9 20 30 {compressed_rle_encode(m)}"
    p = tmp_path / "dets.txt"
    p.write_text("\n".join([good, "0 1 0.9 20 30", good, f"1 1 abc 20 30 {compressed_rle_encode(m)}", "2 1 0.9 20 30 ~~"]) + "\n")
    with pytest.raises(InputFormatError) as exc:
        read_detections(p)
    assert [n for n, _ in exc.value.problems] == [2, 4, 5]
    assert "dets.txt:2:" in str(exc.value)


def test_canvas_mismatch_reported(tmp_path):
    a, b = box(20, 30, 2, 2, 8, 9), box(21, 30, 2, 2, 8, 9)
    p = tmp_path / "d.txt"
    p.write_text(f"0 1 0.9 20 30 {compressed_rle_encode(a)}\n0 1 0.9 21 30 {compressed_rle_encode(b)}\n")
    with pytest.raises(InputFormatError) as exc:
        read_detections(p)
    assert exc.value.problems[0][0] == 2


def test_track_roundtrip_sorted(tmp_path):
    m = box(10, 10, 0, 0, 3, 3)
    obs = [TrackObservation(2, 1, 1, m, 0.9), TrackObservation(0, 5, 2, m, 1.0), TrackObservation(0, 2, 1, m, 0.5)]
    p = tmp_path / "t.txt"
    write_tracks(p, obs)
    back = read_tracks(p)
    assert [(o.frame, o.track_id) for o in back] == [(0, 2), (0, 5), (2, 1)]
    assert back[1] == obs[1]
    assert p.read_bytes().endswith(b"\n") and b"\r" not in p.read_bytes()


def test_meta_roundtrip(tmp_path):
    write_meta(tmp_path / "meta.txt", VideoMeta(12.5, 48, 64))
    assert read_meta(tmp_path / "meta.txt") == VideoMeta(12.5, 48, 64)
    (tmp_path / "bad.txt").write_text("fps = 3\n")
    with pytest.raises(InputFormatError):
        read_meta(tmp_path / "bad.txt")


def test_frames_roundtrip(tmp_path):
    rng = np.random.default_rng(0)
    frames = [rng.random((12, 16)) for _ in range(3)]
    write_frames(tmp_path, frames)
    back = read_frames(tmp_path)
    assert len(back) == 3
    assert all(np.abs(a - b).max() <= 0.5 / 255 + 1e-12 for a, b in zip(frames, back))


def test_rgb_frames_converted(tmp_path):
    from PIL import Image

    px = np.zeros((2, 2, 3), np.uint8)
    px[..., 1] = 255
    Image.fromarray(px, "RGB").save(tmp_path / "000.png")
    (frame,) = read_frames(tmp_path)
    assert np.allclose(frame, 0.587)
