import io
import json

import numpy as np
import pytest

from nlcurv import fileio
from nlcurv.fibers import classify_boundary
from nlcurv.setrep import VoxelSet, rasterize
from nlcurv.shapes import Ball


def test_pgm_roundtrip_8_and_16_bit(tmp_path):
    rng = np.random.default_rng(1)
    for maxval in (255, 1000):
        pix = rng.integers(0, maxval + 1, (7, 11))
        p = tmp_path / f"a{maxval}.pgm"
        fileio.write_pgm(p, pix, maxval)
        back, mv = fileio.read_pnm(p)
        assert mv == maxval and np.array_equal(back, pix)


def test_pbm_roundtrip_odd_width(tmp_path):
    ink = np.random.default_rng(2).random((5, 13)) < 0.5
    p = tmp_path / "a.pbm"
    fileio.write_pbm(p, ink)
    pix, mv = fileio.read_pnm(p)
    assert np.array_equal(pix == 255, ink)


def test_pnm_header_comments(tmp_path):
    p = tmp_path / "c.pgm"
    p.write_bytes(b"P5\n# made by hand\n3 2\n# depth\n255\n" + bytes([0, 1, 2, 3, 4, 255]))
    pix, _ = fileio.read_pnm(p)
    assert pix.tolist() == [[0, 1, 2], [3, 4, 255]]


def test_pnm_rejects_ascii(tmp_path):
    p = tmp_path / "x.pgm"
    p.write_bytes(b"P2\n1 1\n255\n0\n")
    with pytest.raises(ValueError, match="magic"):
        fileio.read_pnm(p)


def test_image_orientation():
    # top image row is the largest x_n; column index is x_1
    pix = np.zeros((3, 4), dtype=np.uint8)
    pix[0, 3] = 255
    A = fileio.image_to_voxels(pix, 0.5, origin=(1.0, 2.0))
    assert A.shape == (4, 3)
    (i, j), = np.argwhere(A.occ)
    assert (i, j) == (3, 2)
    np.testing.assert_allclose(A.centers([[i, j]])[0], [1.0 + 3.5 * 0.5, 2.0 + 2.5 * 0.5])
    assert np.array_equal(fileio.voxels_to_image(A), pix >= 128)


def test_image_set_roundtrip(tmp_path):
    A = rasterize(Ball((0, 0), 1), 1 / 16, padding=0.25)
    p = tmp_path / "d.pbm"
    fileio.save_image_set(p, A)
    assert fileio.load_image_set(p, A.h, origin=A.origin).equals(A)


def test_volume_roundtrip(tmp_path):
    A = rasterize(Ball((0, 0, 0), 0.5), 1 / 8, padding=0.25)
    p = tmp_path / "v.raw"
    fileio.write_volume(p, A)
    assert json.loads((tmp_path / "v.raw.json").read_text())["dims"] == list(A.shape)
    assert fileio.read_volume(p).equals(A)
    p.write_bytes(p.read_bytes()[:-1])
    with pytest.raises(ValueError, match="expected"):
        fileio.read_volume(p)


def test_curvature_csv_roundtrip_exact(tmp_path):
    pts = np.array([[0.1, 1 / 3], [-2.0, 1e-17]])
    vals = np.array([np.pi, -1 / 7])
    p = tmp_path / "h.csv"
    fileio.write_curvature_csv(p, pts, vals)
    assert p.read_text().splitlines()[0] == "x1,x2,H"
    q, v = fileio.read_curvature_csv(p)
    assert np.array_equal(q, pts) and np.array_equal(v, vals)


def test_heatmap_decodes_within_quantization(tmp_path):
    A = VoxelSet(np.ones((6, 4)), 0.5)
    vals = np.linspace(-1, 2, 24).reshape(6, 4)
    p = tmp_path / "m.pgm"
    meta = fileio.write_heatmap(p, A, vals)
    pix, _ = fileio.read_pnm(p)
    dec = meta["lo"] + pix.astype(float)[::-1, :].T * (meta["hi"] - meta["lo"]) / 255
    assert np.max(np.abs(dec - vals)) <= 0.5 * 3 / 255 + 1e-12
    assert json.loads((tmp_path / "m.pgm.json").read_text())["lo"] == -1.0


def test_classification_csv():
    A = rasterize(Ball((0, 0), 0.5), 1 / 8, padding=0.25)
    recs = classify_boundary(A)
    buf = io.StringIO()
    fileio.write_classification_csv(buf, recs)
    lines = buf.getvalue().splitlines()
    assert lines[0] == "x1,x2,class,partner_x1,partner_x2,H"
    assert len(lines) == len(recs) + 1
    assert {ln.split(",")[2] for ln in lines[1:]} <= {"P1", "P2", "P3", "P4"}
