import json
import struct

import numpy as np
import pytest

from wamkit import (
    EmConfig,
    FeatureMatrix,
    Gaussian,
    InvalidInput,
    InvalidModel,
    Truncated,
    UnknownFormat,
    fit_gmm,
    read_features,
    read_model,
    write_features,
    write_model,
)

from util import make_gmm


class TestFeatureRoundTrip:
    def test_minimal_file_is_29_bytes(self, tmp_path):
        path = tmp_path / "one.fmx"
        write_features(FeatureMatrix(np.array([[3.5]], dtype=np.float64)), path)
        blob = path.read_bytes()
        assert len(blob) == 29
        assert blob[:4] == b"FMX1"
        assert blob[4] == 1  # float64 code
        rows, cols = struct.unpack_from("<QQ", blob, 5)
        assert (rows, cols) == (1, 1)
        assert struct.unpack_from("<d", blob, 21)[0] == 3.5

    def test_float32_round_trip_is_bitwise(self, tmp_path):
        rng = np.random.default_rng(0)
        for trial in range(10):
            data = rng.normal(size=(int(rng.integers(1, 50)), int(rng.integers(1, 20))))
            data = data.astype(np.float32)
            path = tmp_path / f"f32_{trial}.fmx"
            write_features(FeatureMatrix(data), path)
            back = read_features(path)
            assert back.data.dtype == np.float32
            assert np.array_equal(
                back.data.view(np.uint32), data.view(np.uint32)
            )

    def test_float64_round_trip_is_bitwise(self, tmp_path):
        rng = np.random.default_rng(1)
        data = rng.normal(size=(37, 11))
        path = tmp_path / "f64.fmx"
        write_features(FeatureMatrix(data), path)
        back = read_features(path)
        assert back.data.dtype == np.float64
        assert np.array_equal(back.data.view(np.uint64), data.view(np.uint64))

    def test_other_dtypes_are_widened(self):
        fm = FeatureMatrix(np.arange(6, dtype=np.int32).reshape(2, 3))
        assert fm.data.dtype == np.float64

    def test_large_matrix_round_trip(self, tmp_path):
        rng = np.random.default_rng(2)
        data = rng.normal(size=(1000, 64)).astype(np.float32)
        path = tmp_path / "big.fmx"
        write_features(FeatureMatrix(data), path)
        assert np.array_equal(read_features(path).data, data)


class TestFeatureValidation:
    def test_empty_matrix_rejected(self):
        with pytest.raises(InvalidInput):
            FeatureMatrix(np.zeros((0, 4)))

    def test_one_dimensional_rejected(self):
        with pytest.raises(InvalidInput):
            FeatureMatrix(np.zeros(4))

    def test_nan_names_flat_index(self):
        data = np.zeros((2, 3))
        data[1, 0] = np.nan
        with pytest.raises(InvalidInput, match="flat index 3"):
            FeatureMatrix(data)

    def test_corrupt_magic(self, tmp_path):
        path = tmp_path / "bad.fmx"
        write_features(FeatureMatrix(np.ones((2, 2))), path)
        blob = bytearray(path.read_bytes())
        blob[:4] = b"XMF9"
        path.write_bytes(bytes(blob))
        with pytest.raises(UnknownFormat):
            read_features(path)

    def test_unknown_dtype_code(self, tmp_path):
        path = tmp_path / "bad_dtype.fmx"
        write_features(FeatureMatrix(np.ones((2, 2))), path)
        blob = bytearray(path.read_bytes())
        blob[4] = 7
        path.write_bytes(bytes(blob))
        with pytest.raises(UnknownFormat):
            read_features(path)

    def test_truncated_payload_reports_sizes(self, tmp_path):
        path = tmp_path / "cut.fmx"
        write_features(FeatureMatrix(np.ones((4, 4))), path)
        whole = path.read_bytes()
        path.write_bytes(whole[:-5])
        with pytest.raises(Truncated) as exc:
            read_features(path)
        assert exc.value.expected == len(whole)
        assert exc.value.got == len(whole) - 5

    def test_truncated_header(self, tmp_path):
        path = tmp_path / "stub.fmx"
        path.write_bytes(b"FMX1\x01")
        with pytest.raises(Truncated):
            read_features(path)

    def test_nan_payload_rejected_on_read(self, tmp_path):
        # Build the blob by hand so the writer's own validation cannot help.
        payload = np.array([[1.0, 2.0], [5.0, np.nan]], dtype="<f8")
        blob = struct.pack("<4sBQQ", b"FMX1", 1, 2, 2) + payload.tobytes(order="C")
        path = tmp_path / "nan.fmx"
        path.write_bytes(blob)
        with pytest.raises(InvalidInput, match="flat index 3"):
            read_features(path)


def toy_gmm():
    return make_gmm(
        [0.25, 0.75],
        [
            Gaussian(np.array([0.0, 1.0]), np.array([[2.0, 0.5], [0.5, 1.0]])),
            Gaussian(np.array([3.0, -1.0]), np.eye(2) * 0.25),
        ],
    )


class TestModelRoundTrip:
    def test_round_trip_preserves_floats_exactly(self, tmp_path):
        gmm = toy_gmm()
        path = tmp_path / "model.json"
        write_model(gmm, path)
        back = read_model(path)
        assert back.k == gmm.k and back.dim == gmm.dim
        assert np.array_equal(back.weights, gmm.weights)
        for orig, loaded in zip(gmm.components, back.components):
            assert np.array_equal(orig.mean, loaded.mean)
            assert np.array_equal(orig.cov, loaded.cov)
        assert back.meta.transform.log == gmm.meta.transform.log
        assert back.meta.transform.epsilon == gmm.meta.transform.epsilon

    def test_canonical_text_for_unit_normal(self, tmp_path):
        gmm = make_gmm([1.0], [Gaussian(np.array([0.0]), np.array([[1.0]]))])
        path = tmp_path / "unit.json"
        write_model(gmm, path)
        expected = (
            "{\n"
            '  "format": "gmm-v1",\n'
            '  "dim": 1,\n'
            '  "k": 1,\n'
            '  "weights": [\n    1.0\n  ],\n'
            '  "means": [\n    [\n      0.0\n    ]\n  ],\n'
            '  "covariances_lower": [\n    [\n      1.0\n    ]\n  ],\n'
            '  "transform": {\n    "log": false,\n    "epsilon": 1e-06\n  },\n'
            '  "fit": {\n    "seed": 0,\n    "iterations": 0,\n    "loglik": 0.0\n  }\n'
            "}\n"
        )
        assert path.read_text() == expected

    def test_fitting_twice_writes_identical_bytes(self, tmp_path):
        rng = np.random.default_rng(3)
        x = np.vstack([
            rng.normal(size=(150, 2)),
            rng.normal(loc=6.0, size=(150, 2)),
        ])
        p1 = tmp_path / "a.json"
        p2 = tmp_path / "b.json"
        write_model(fit_gmm(x, 2, EmConfig(seed=11)), p1)
        write_model(fit_gmm(x, 2, EmConfig(seed=11)), p2)
        assert p1.read_bytes() == p2.read_bytes()


class TestModelValidation:
    def write_doc(self, tmp_path, mutate):
        gmm = toy_gmm()
        path = tmp_path / "model.json"
        write_model(gmm, path)
        doc = json.loads(path.read_text())
        mutate(doc)
        path.write_text(json.dumps(doc))
        return path

    def test_not_json(self, tmp_path):
        path = tmp_path / "garbage.json"
        path.write_text("{not json")
        with pytest.raises(InvalidModel):
            read_model(path)

    def test_wrong_format_tag(self, tmp_path):
        path = self.write_doc(tmp_path, lambda d: d.update(format="gmm-v2"))
        with pytest.raises(UnknownFormat):
            read_model(path)

    def test_weights_off_by_too_much(self, tmp_path):
        path = self.write_doc(tmp_path, lambda d: d.update(weights=[0.5, 0.6]))
        with pytest.raises(InvalidModel, match="weights"):
            read_model(path)

    def test_weights_within_tolerance_renormalized(self, tmp_path):
        def nudge(d):
            d["weights"] = [0.25 + 4e-7, 0.75 + 4e-7]

        path = self.write_doc(tmp_path, nudge)
        back = read_model(path)
        assert back.weights.sum() == pytest.approx(1.0, abs=1e-12)

    def test_negative_weight(self, tmp_path):
        path = self.write_doc(tmp_path, lambda d: d.update(weights=[-0.25, 1.25]))
        with pytest.raises(InvalidModel):
            read_model(path)

    def test_missing_field_is_named(self, tmp_path):
        path = self.write_doc(tmp_path, lambda d: d.pop("means"))
        with pytest.raises(InvalidModel, match="means"):
            read_model(path)

    def test_wrong_mean_length(self, tmp_path):
        path = self.write_doc(tmp_path, lambda d: d["means"].__setitem__(0, [1.0]))
        with pytest.raises(InvalidModel):
            read_model(path)

    def test_wrong_triangle_length(self, tmp_path):
        path = self.write_doc(
            tmp_path, lambda d: d["covariances_lower"].__setitem__(0, [1.0, 0.0])
        )
        with pytest.raises(InvalidModel):
            read_model(path)

    def test_nonpositive_epsilon(self, tmp_path):
        path = self.write_doc(tmp_path, lambda d: d["transform"].update(epsilon=0.0))
        with pytest.raises(InvalidModel):
            read_model(path)

    def test_bad_dim(self, tmp_path):
        path = self.write_doc(tmp_path, lambda d: d.update(dim=0))
        with pytest.raises(InvalidModel):
            read_model(path)

    def test_non_integer_k(self, tmp_path):
        path = self.write_doc(tmp_path, lambda d: d.update(k=2.5))
        with pytest.raises(InvalidModel):
            read_model(path)
