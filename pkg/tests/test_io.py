import json
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ptables import decompose, example_table, reconstruct, simulate_observations
from ptables import io
from ptables.data import fixture_path
from ptables.exceptions import ColumnNotNormalized, ParseError
from ptables.quantum import qubit_polarization_preset, quantum_table

from conftest import random_table


class TestValues:
    def test_format(self):
        assert io.format_value(Fraction(1, 2)) == "1/2"
        assert io.format_value(Fraction(3)) == "3"
        assert io.format_value(np.float64(0.1)) == 0.1

    def test_parse(self):
        assert io.parse_value("3/4", "exact") == Fraction(3, 4)
        assert io.parse_value(0.25, "exact") == Fraction(1, 4)
        assert io.parse_value(0.1, "exact") == Fraction("0.1")
        assert io.parse_value("1/3", "float") == pytest.approx(1 / 3, abs=0)
        for bad in ("abc", "1/0", True, None, [1]):
            with pytest.raises(ParseError):
                io.parse_value(bad, "exact")

    @given(st.floats(allow_nan=False, allow_infinity=False))
    def test_float_round_trip(self, x):
        assert io.loads(io.dumps([io.format_value(x)]))[0] == x

    def test_non_finite_rejected(self):
        for text in ('{"a": NaN}', '{"a": Infinity}', '[-Infinity]'):
            with pytest.raises(ParseError):
                io.loads(text)

    def test_syntax_error_location(self):
        with pytest.raises(ParseError, match="line 2"):
            io.loads('{\n  "a": }')


class TestTables:
    def test_round_trip_exact(self, example, tmp_path):
        path = tmp_path / "t.json"
        io.save_table(example, path)
        assert io.load_table(path) == example
        assert io.load_table(path).entries[0, 4] == Fraction(3, 4)

    def test_packaged_fixture(self, example):
        doc = json.loads(fixture_path("example_table.json").read_text())
        assert io.table_to_dict(example) == doc

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.booleans())
    def test_round_trip_random(self, seed, exact):
        t = random_table(np.random.default_rng(seed), exact=exact)
        back = io.table_from_dict(io.loads(io.dumps(io.table_to_dict(t))))
        assert back.mode == t.mode
        assert back.entries.tolist() == t.entries.tolist()

    def test_mode_override(self, example):
        t = io.table_from_dict(io.table_to_dict(example), mode="float")
        assert not t.exact and t.entries[0, 4] == 0.75

    def test_domain_errors_pass_through(self, example):
        doc = io.table_to_dict(example)
        doc["entries"][0][0] = "1/2"
        with pytest.raises(ColumnNotNormalized):
            io.table_from_dict(doc)

    def test_structural_errors(self, example):
        doc = io.table_to_dict(example)
        del doc["entries"]
        with pytest.raises(ParseError, match="entries"):
            io.table_from_dict(doc)
        doc = io.table_to_dict(example)
        doc["entries"][2] = doc["entries"][2][:3]
        with pytest.raises(ParseError):
            io.table_from_dict(doc)
        with pytest.raises(ParseError):
            io.table_from_dict([1, 2])

    def test_csv(self, example, tmp_path):
        path = tmp_path / "t.csv"
        header = ",," + ",".join(example.preparations)
        lines = [header]
        for (k, r), row in zip(example.row_labels, io.table_to_dict(example)["entries"]):
            lines.append(",".join([k, r, *row]))
        path.write_text("\n".join(lines) + "\n")
        assert io.load_table(path) == example
        assert io.load_table(path, mode="float") == example.as_float()

    def test_csv_non_contiguous(self, tmp_path):
        path = tmp_path / "t.csv"
        path.write_text(",,a\nM,x,1\nN,y,1\nM,z,0\n")
        with pytest.raises(ParseError, match="contiguous"):
            io.load_table(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ParseError):
            io.load_table(tmp_path / "nope.json")


class TestDecompositions:
    @pytest.mark.parametrize("basis", ["identity", "paper-example"])
    def test_round_trip(self, example, basis):
        dec = decompose(example, basis)
        doc = io.loads(io.dumps(io.decomposition_to_dict(dec, {"rank": None, "rec": 1e-9})))
        back = io.decomposition_from_dict(doc)
        assert reconstruct(back) == example
        assert back.preparation_vectors.tolist() == dec.preparation_vectors.tolist()
        assert back.result_vectors.tolist() == dec.result_vectors.tolist()
        assert back.x.tolist() == dec.x.tolist()
        assert back.block_form.row_perm == dec.block_form.row_perm
        if basis == "paper-example":
            assert doc["preparation_vectors"]["S_7"] == ["1", "1/2", "0"]

    def test_float_round_trip(self):
        t = quantum_table(qubit_polarization_preset())
        dec = decompose(t)
        back = io.decomposition_from_dict(io.loads(io.dumps(io.decomposition_to_dict(dec))))
        np.testing.assert_array_equal(back.preparation_vectors, dec.preparation_vectors)
        np.testing.assert_allclose(reconstruct(back).entries, t.entries, atol=1e-12)

    def test_bad_lengths(self, example):
        doc = io.decomposition_to_dict(decompose(example))
        doc["K"] = 2
        with pytest.raises(ParseError, match="K"):
            io.decomposition_from_dict(doc)
        doc = io.decomposition_to_dict(decompose(example))
        doc["row_perm"] = [0, 0, 1, 2, 3, 4]
        with pytest.raises(ParseError):
            io.decomposition_from_dict(doc)


class TestObservations:
    def test_round_trip(self, example):
        obs = simulate_observations(example, "S_5", [("M_1", 40), ("M_3", 7)], seed=5)
        doc = io.loads(io.dumps(io.observations_to_dict(obs, example)))
        assert doc["seed"] == 5 and doc["true_prep"] == "S_5"
        assert io.observations_from_dict(doc, example) == obs

    def test_rejects(self, example):
        with pytest.raises(ParseError):
            io.observations_from_dict({"counts": [{"intervention": "M_1", "result": "R_1", "n": -1}]}, example)
        with pytest.raises(ParseError):
            io.observations_from_dict({"counts": [{"intervention": "M_1", "n": 1}]}, example)
        with pytest.raises(KeyError):
            io.observations_from_dict({"counts": [{"intervention": "M_9", "result": "R_1", "n": 1}]}, example)


class TestQuantumModels:
    def test_round_trip(self):
        model = qubit_polarization_preset()
        back = io.quantum_model_from_dict(io.loads(io.dumps(io.quantum_model_to_dict(model))))
        assert back.state_labels == model.state_labels
        assert back.result_labels == model.result_labels
        for a, b in zip(back.states, model.states):
            np.testing.assert_array_equal(a, b)
        assert quantum_table(back) == quantum_table(model)

    def test_real_only_matrices(self):
        doc = {"dimension": 2, "states": [{"re": [[1, 0], [0, 0]]}], "povms": [{"elements": [{"re": [[1, 0], [0, 1]]}]}]}
        t = quantum_table(io.quantum_model_from_dict(doc))
        assert t.entries.tolist() == [[1.0]]


class TestDeterminism:
    def test_byte_identical(self, example, tmp_path):
        dec = decompose(example, "paper-example")
        io.write_json(io.decomposition_to_dict(dec), tmp_path / "a.json")
        io.write_json(io.decomposition_to_dict(decompose(example_table(), "paper-example")), tmp_path / "b.json")
        assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()
