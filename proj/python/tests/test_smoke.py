import json
import os
import shutil
import struct
import subprocess
from pathlib import Path

import numpy as np
import pytest

import clothccd

ROOT = Path(__file__).resolve().parents[2]
TRIANGLE = np.array([0, 1, 2])


def crossing():
    """Vertex 0 falls through the unit triangle (a collider) at t = 0.5."""
    far = [[10, 10, 10], [11, 10, 10], [10, 11, 10]]
    start = np.array([[0.25, 0.25, 1.0]] + far)
    end = np.array([[0.25, 0.25, -1.0]] + far)
    faces = np.array([1, 2, 3])
    collider = np.array([[0, 0, 0], [1, 0, 0], [0, 1, 0]], dtype=float)
    return start, end, faces, collider


def grid(res, size):
    xs = np.linspace(-size / 2, size / 2, res)
    pts = np.array([[x, y, 0.0] for y in xs for x in xs])
    faces = []
    for j in range(res - 1):
        for i in range(res - 1):
            a, b, c, d = j * res + i, j * res + i + 1, (j + 1) * res + i + 1, (j + 1) * res + i
            faces += [a, b, c, a, c, d]
    return pts, np.array(faces)


def box(lo, hi):
    (x0, y0, z0), (x1, y1, z1) = lo, hi
    v = np.array([[x, y, z] for z in (z0, z1) for y in (y0, y1) for x in (x0, x1)], dtype=float)
    faces = [0, 2, 1, 1, 2, 3, 4, 5, 6, 5, 7, 6, 0, 1, 4, 1, 5, 4,
             2, 6, 3, 3, 6, 7, 0, 4, 2, 2, 4, 6, 1, 3, 5, 3, 7, 5]
    return v, np.array(faces)


def self_crossing():
    start = np.array([[0, 0, 0], [1, 0, 0], [0, 1, 0], [0.25, 0.25, -0.5]], dtype=float)
    end = start.copy()
    end[3, 2] = 0.5
    return start, end, TRIANGLE


def test_detect_crossing():
    start, end, faces, collider = crossing()
    r = clothccd.detect_flat(start, end, faces, collider_start=collider, collider_faces=TRIANGLE)
    assert r["kinds"] == ["VF"]
    assert r["t_c"].tolist() == pytest.approx([0.5], abs=1e-12)
    assert r["a"][0].tolist() == [0, -1, -1]
    assert r["b"][0].tolist() == [0, 1, 2]


def test_detect_clean_frames():
    start, _, faces, collider = crossing()
    r = clothccd.detect_flat(start, start, faces, collider_start=collider, collider_faces=TRIANGLE)
    assert r["kinds"] == [] and r["t_c"].size == 0 and r["a"].shape == (0, 3)


def encode(r):
    """CEVT1 text rebuilt from the arrays."""
    def side(mesh, idx):
        name = "cloth" if mesh == -1 else f"collider:{mesh}"
        return " ".join([name] + [str(i) for i in idx if i >= 0])

    lines = [f"CEVT1 {len(r['kinds'])}"]
    for i, kind in enumerate(r["kinds"]):
        params = " ".join("%.17g" % p for p in r["params"][i])
        lines.append(f"{kind} {side(r['mesh_a'][i], r['a'][i])} | "
                     f"{side(r['mesh_b'][i], r['b'][i])} | {'%.17g' % r['t_c'][i]} | {params}")
    return "\n".join(lines) + "\n"


def test_arrays_reencode_to_the_event_text():
    rng = np.random.default_rng(4)
    start = rng.uniform(-0.5, 0.5, (18, 3))
    end = start + rng.uniform(-0.4, 0.4, (18, 3))
    faces = np.arange(18)
    r = clothccd.detect_flat(start, end, faces)
    assert len(r["kinds"]) > 0
    assert encode(r) == r["text"]


def cli_path():
    for candidate in (os.environ.get("CLOTHCCD_CLI"), ROOT / "build" / "tools" / "clothccd"):
        if candidate and Path(candidate).exists():
            return str(candidate)
    return shutil.which("clothccd")


def write_obj(path, x, faces):
    with open(path, "w") as f:
        for p in x:
            f.write("v %.17g %.17g %.17g\n" % tuple(p))
        for t in np.asarray(faces).reshape(-1, 3):
            f.write("f %d %d %d\n" % tuple(t + 1))


def write_ctrj(path, frames, dt=1 / 60):
    with open(path, "wb") as f:
        f.write(("CTRJ1 %d %d %.17g\n" % (len(frames[0]), len(frames), dt)).encode())
        for frame in frames:
            f.write(struct.pack("<%dd" % frame.size, *np.asarray(frame, dtype="<f8").ravel()))


@pytest.mark.skipif(cli_path() is None, reason="clothccd executable not built")
def test_detect_matches_cli(tmp_path):
    rng = np.random.default_rng(11)
    start = rng.uniform(-0.5, 0.5, (18, 3))
    end = start + rng.uniform(-0.4, 0.4, (18, 3))
    faces = np.arange(18)
    write_obj(tmp_path / "m.obj", start, faces)
    write_ctrj(tmp_path / "t.ctrj", [start, end])
    out = subprocess.run([cli_path(), "detect", "--mesh", str(tmp_path / "m.obj"),
                          "--trajectory", str(tmp_path / "t.ctrj")],
                         check=True, capture_output=True, text=True).stdout
    r = clothccd.detect_flat(start, end, faces)
    assert encode(r) == out


@pytest.mark.skipif(cli_path() is None, reason="clothccd executable not built")
def test_ccd_loss_matches_cli_bitwise(tmp_path):
    rng = np.random.default_rng(12)
    start = rng.uniform(-0.5, 0.5, (18, 3))
    end = start + rng.uniform(-0.4, 0.4, (18, 3))
    faces = np.arange(18)
    write_obj(tmp_path / "m.obj", start, faces)
    write_obj(tmp_path / "s.obj", start, faces)
    write_obj(tmp_path / "e.obj", end, faces)
    out = subprocess.run([cli_path(), "loss", "ccd", "--mesh", str(tmp_path / "m.obj"),
                          "--start", str(tmp_path / "s.obj"), "--end", str(tmp_path / "e.obj"),
                          "--gradient"], check=True, capture_output=True, text=True).stdout
    report = json.loads(out)
    loss, gradient, count = clothccd.ccd_loss_flat(start, end, faces)
    assert count == report["event_count"] > 0
    assert loss == report["loss"]
    assert gradient.tolist() == np.array(report["gradient"]).ravel().tolist()


def test_ccd_loss_no_events():
    start, _, _ = self_crossing()
    loss, gradient, count = clothccd.ccd_loss_flat(start, start, TRIANGLE)
    assert (loss, count) == (0.0, 0)
    assert gradient.shape == (12,) and not gradient.any()


def test_ccd_loss_single_event():
    start, end, faces = self_crossing()
    loss, gradient, count = clothccd.ccd_loss_flat(start, end, faces, eps=0.01)
    assert count == 1
    assert loss == pytest.approx(0.065025, abs=1e-15)
    g = gradient.reshape(-1, 3)
    assert g[3].tolist() == pytest.approx([0, 0, 0.13005], abs=1e-15)
    assert not g[:3].any()


def test_contact_loss():
    floor = np.array([[0, 0, 0], [1, 0, 0], [0, 1, 0]], dtype=float)
    loss, gradient, count = clothccd.contact_loss_flat([0.25, 0.25, -0.1], floor, TRIANGLE)
    assert loss == pytest.approx(0.001, abs=1e-15) and count == 1


def test_postprocess_clean_and_tunneling():
    start, end, faces, collider = crossing()
    kw = dict(collider_start=collider, collider_faces=TRIANGLE)
    pos, iters, converged = clothccd.postprocess_flat(start, start, faces, **kw)
    assert (iters, converged) and iters == 0 and pos.tolist() == start.ravel().tolist()
    pos, iters, converged = clothccd.postprocess_flat(start, end, faces, eps=0.01, **kw)
    assert converged and iters == 1
    assert pos[2] == pytest.approx(1.0 - 2.0 * 0.49, abs=1e-12)


def test_postprocess_grid_on_stick():
    pts, faces = grid(15, 1.0)
    stick, stick_faces = box((-1, -0.02, -0.02), (1, 0.02, 0.02))
    start = pts + [0, 0, 0.05]
    predicted = pts + np.stack([0.01 * pts[:, 1], 0 * pts[:, 1], -0.15 - 0.4 * pts[:, 1] ** 2], 1)
    kw = dict(collider_start=stick, collider_faces=stick_faces)
    pos, iters, converged = clothccd.postprocess_flat(start, predicted, faces, **kw)
    assert converged and 1 <= iters <= 10
    again = clothccd.detect_flat(start, pos, faces, **kw)
    assert again["kinds"] == []


def test_stateless_repeat_calls():
    start, end, faces = self_crossing()
    a = clothccd.ccd_loss_flat(start, end, faces)
    b = clothccd.ccd_loss_flat(start, end, faces)
    assert a[0] == b[0] and a[1].tolist() == b[1].tolist()


def test_errors_carry_core_message():
    with pytest.raises(ValueError, match="not divisible by 3"):
        clothccd.detect_flat(np.zeros(4), np.zeros(4), TRIANGLE)
    with pytest.raises(ValueError, match="out of range"):
        clothccd.detect_flat(np.zeros(9), np.zeros(9), [0, 1, 7])
    with pytest.raises(ValueError, match="unknown contact kind"):
        clothccd.detect_flat(np.zeros(9), np.zeros(9), TRIANGLE, kinds="VV")
