import numpy as np
import pytest

from ppgraph import (
    FieldFormatError,
    PlanarField,
    load_field,
    load_matrix,
    save_field,
    save_matrix,
)

from conftest import rng_for


class TestPlanarField:
    def test_heatmap_predicate(self):
        assert PlanarField(np.full((1, 4, 4), 0.5), stride=4.0).is_heatmap()
        assert not PlanarField(np.full((1, 4, 4), 1.5), stride=4.0).is_heatmap()
        assert not PlanarField(np.full((3, 4, 4), 0.5), stride=4.0).is_heatmap()

    def test_stride_positive(self):
        with pytest.raises(FieldFormatError):
            PlanarField(np.zeros((1, 4, 4)), stride=0.0)

    def test_non_finite_rejected(self):
        vals = np.zeros((1, 4, 4))
        vals[0, 1, 1] = np.nan
        with pytest.raises(FieldFormatError):
            PlanarField(vals, stride=1.0)

    def test_2d_promoted(self):
        f = PlanarField(np.zeros((4, 6)), stride=4.0)
        assert f.channels == 1 and f.grid_height == 4 and f.grid_width == 6
        assert f.image_width == 24 and f.image_height == 16


class TestPpgfRoundtrip:
    def test_field_bytes_stable(self, tmp_path):
        rng = rng_for(2)
        vals = rng.uniform(0, 1, size=(1, 12, 9)).astype(np.float32).astype(float)
        f = PlanarField(vals, stride=4.0)
        p1 = tmp_path / "a.ppgf"
        p2 = tmp_path / "b.ppgf"
        save_field(f, p1)
        g = load_field(p1)
        save_field(g, p2)
        assert p1.read_bytes() == p2.read_bytes()
        assert g.stride == 4.0
        assert np.array_equal(g.values, f.values)

    def test_header_layout(self, tmp_path):
        f = PlanarField(np.zeros((2, 3, 5)), stride=2.0)
        p = tmp_path / "x.ppgf"
        save_field(f, p)
        raw = p.read_bytes()
        assert raw[:4] == b"PPGF"
        assert np.frombuffer(raw[4:16], dtype="<u4").tolist() == [2, 3, 5]
        assert np.frombuffer(raw[16:20], dtype="<f4")[0] == 2.0
        assert len(raw) == 20 + 4 * 2 * 3 * 5

    def test_bad_magic(self, tmp_path):
        p = tmp_path / "bad.ppgf"
        p.write_bytes(b"NOPE" + bytes(16))
        with pytest.raises(FieldFormatError):
            load_field(p)

    def test_truncated_payload(self, tmp_path):
        f = PlanarField(np.zeros((1, 4, 4)), stride=1.0)
        p = tmp_path / "t.ppgf"
        save_field(f, p)
        p.write_bytes(p.read_bytes()[:-8])
        with pytest.raises(FieldFormatError):
            load_field(p)


class TestMatrixSentinel:
    def test_matrix_roundtrip(self, tmp_path):
        rng = rng_for(7)
        m = rng.uniform(0, 1, size=(6, 6))
        m = np.minimum(m, m.T)
        np.fill_diagonal(m, 0.0)
        p = tmp_path / "scores.ppgf"
        save_matrix(m, p)
        back = load_matrix(p)
        assert back.shape == (6, 6)
        assert np.allclose(back, m, atol=1e-7)

    def test_matrix_not_loadable_as_field(self, tmp_path):
        p = tmp_path / "scores.ppgf"
        save_matrix(np.zeros((3, 3)), p)
        with pytest.raises(FieldFormatError):
            load_field(p)

    def test_field_not_loadable_as_matrix(self, tmp_path):
        p = tmp_path / "field.ppgf"
        save_field(PlanarField(np.zeros((1, 4, 4)), stride=4.0), p)
        with pytest.raises(FieldFormatError):
            load_matrix(p)

    def test_non_square_rejected(self, tmp_path):
        with pytest.raises(FieldFormatError):
            save_matrix(np.zeros((3, 4)), tmp_path / "x.ppgf")
