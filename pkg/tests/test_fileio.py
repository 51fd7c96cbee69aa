"""File formats: round trips, malformed-input reporting, atomic writes."""

import json
import os

import numpy as np
import pytest

from indistinguo.errors import InputDataError
from indistinguo.fileio import (
    atomic_write_text,
    config_key,
    parse_config_key,
    parse_unitary_spec,
    read_counts_csv,
    read_cyclic_counts,
    read_detection_model,
    read_distribution,
    read_json,
    read_noise,
    read_ratio_observations,
    read_scenario,
    read_variance_observations,
    write_counts_csv,
    write_cyclic_counts,
    write_distribution,
    write_ensemble_csv,
    write_histogram_csv,
    write_json,
    write_ratio_observations,
    write_variance_observations,
)
from indistinguo.interference import output_distribution, variance_closed_form
from indistinguo.matrices import cyclic_unitary, fourier_unitary, haar_random_unitary
from indistinguo.montecarlo import run_haar_ensemble
from indistinguo.noise import DetectionModel, NoiseParameters, pnr_detection_efficiencies
from indistinguo.reconstruct import RatioObservation, VarianceObservation
from indistinguo.states import gram_from_overlaps, overlaps, scenario_to_json

MODES3 = (0, 1, 2)


class TestJsonPrimitives:
    def test_round_trip_and_layout(self, tmp_path):
        path = str(tmp_path / "obj.json")
        write_json(path, {"b": 1, "a": [1, 2]})
        text = open(path).read()
        assert text.endswith("\n")
        assert text.index('"a"') < text.index('"b"')  # sorted keys
        assert read_json(path) == {"b": 1, "a": [1, 2]}

    def test_deterministic_bytes(self, tmp_path):
        p1, p2 = str(tmp_path / "one.json"), str(tmp_path / "two.json")
        write_json(p1, {"x": 0.1, "y": [3, 2]})
        write_json(p2, {"y": [3, 2], "x": 0.1})
        assert open(p1, "rb").read() == open(p2, "rb").read()

    def test_bad_json_names_file(self, tmp_path):
        path = str(tmp_path / "bad.json")
        open(path, "w").write("{nope")
        with pytest.raises(InputDataError, match="bad.json"):
            read_json(path)

    def test_atomic_write_leaves_no_temp_files(self, tmp_path):
        path = str(tmp_path / "out.txt")
        atomic_write_text(path, "hello")
        assert open(path).read() == "hello"
        assert os.listdir(tmp_path) == ["out.txt"]


class TestConfigKeys:
    def test_round_trip(self):
        assert config_key((3, 0, 0)) == "3-0-0"
        assert parse_config_key("3-0-0") == (3, 0, 0)
        assert parse_config_key(" 1-1-1 ") == (1, 1, 1)

    def test_rejects_garbage(self):
        with pytest.raises(InputDataError):
            parse_config_key("3-x-0")
        with pytest.raises(InputDataError):
            parse_config_key("3--1-0")
        with pytest.raises(InputDataError):
            parse_config_key("")


class TestCountsCsv:
    def test_round_trip(self, tmp_path):
        path = str(tmp_path / "counts.csv")
        counts = {(3, 0, 0): 10, (1, 1, 1): 25, (0, 0, 3): 0}
        write_counts_csv(path, counts)
        assert open(path).readline().strip() == "config,count"
        assert read_counts_csv(path) == counts

    def test_duplicate_rows_accumulate(self, tmp_path):
        path = str(tmp_path / "counts.csv")
        open(path, "w").write("config,count\n3-0-0,5\n\n3-0-0,7\n")
        assert read_counts_csv(path) == {(3, 0, 0): 12}

    def test_header_is_optional(self, tmp_path):
        path = str(tmp_path / "counts.csv")
        open(path, "w").write("3-0-0,5\n1-1-1,2\n")
        assert read_counts_csv(path) == {(3, 0, 0): 5, (1, 1, 1): 2}

    def test_errors_name_file_and_line(self, tmp_path):
        path = str(tmp_path / "bad.csv")
        open(path, "w").write("config,count\n3-0-0,5\n1-1-1,-2\n")
        with pytest.raises(InputDataError, match=r"bad\.csv:3"):
            read_counts_csv(path)
        open(path, "w").write("config,count\nonly-one-cell\n")
        with pytest.raises(InputDataError, match=r"bad\.csv:2"):
            read_counts_csv(path)

    def test_empty_file_rejected(self, tmp_path):
        path = str(tmp_path / "empty.csv")
        open(path, "w").write("\n")
        with pytest.raises(InputDataError, match="no count rows"):
            read_counts_csv(path)


class TestDistributionFile:
    def test_round_trip(self, tmp_path, tritter):
        path = str(tmp_path / "dist.json")
        d = output_distribution(tritter, gram_from_overlaps(0.7, 0.5, 0.9), MODES3)
        write_distribution(path, d)
        back = read_distribution(path)
        assert back.configs == d.configs
        assert np.allclose(back.probs, d.probs)


class TestVarianceObservationFiles:
    def test_round_trip(self, tmp_path):
        delta = overlaps(gram_from_overlaps(0.7, 0.5, 0.9))
        observations = []
        for k in range(4):
            u = haar_random_unitary(3, k)
            observations.append(
                VarianceObservation.from_unitary(
                    u, variance_closed_form(u, delta), 1e-6
                )
            )
        csv_path = str(tmp_path / "sigma.csv")
        moduli_path = str(tmp_path / "moduli.json")
        write_variance_observations(csv_path, moduli_path, observations)
        back = read_variance_observations(csv_path, moduli_path)
        assert len(back) == 4
        for a, b in zip(back, observations):
            assert a.sigma == b.sigma
            assert a.variance == b.variance
            assert np.array_equal(a.moduli, b.moduli)

    def test_missing_unitary_id(self, tmp_path):
        csv_path = str(tmp_path / "sigma.csv")
        moduli_path = str(tmp_path / "moduli.json")
        open(csv_path, "w").write("unitary_id,sigma,sigma_var\nu9,1.0,1e-6\n")
        write_json(moduli_path, {"u0": np.full((3, 3), 1 / 3).tolist()})
        with pytest.raises(InputDataError, match="u9"):
            read_variance_observations(csv_path, moduli_path)


class TestRatioObservationFiles:
    def test_round_trip(self, tmp_path):
        path = str(tmp_path / "ratios.csv")
        observations = [
            RatioObservation(m=0, n=1, i=0, j=2, ratio=0.43, error=0.01),
            RatioObservation(m=1, n=2, i=0, j=1, ratio=0.27, error=0.02),
        ]
        write_ratio_observations(path, observations)
        back = read_ratio_observations(path)
        assert back == observations

    def test_bad_row_is_located(self, tmp_path):
        path = str(tmp_path / "ratios.csv")
        open(path, "w").write("m,n,i,j,R,err\n0,1,0,2,0.4,0.01\n0,0,0,2,0.4,0.01\n")
        with pytest.raises(InputDataError, match=r"ratios\.csv:3"):
            read_ratio_observations(path)


class TestCyclicCountFiles:
    def test_round_trip(self, tmp_path):
        path = str(tmp_path / "scan.csv")
        alphas = np.linspace(0.0, 3.0, 7)
        plus = np.arange(7) * 10 + 100
        minus = np.arange(7) * 5 + 90
        write_cyclic_counts(path, alphas, plus, minus)
        a, p, m = read_cyclic_counts(path)
        assert np.allclose(a, alphas)
        assert np.array_equal(p, plus)
        assert np.array_equal(m, minus)

    def test_one_sided_setting_rejected(self, tmp_path):
        path = str(tmp_path / "scan.csv")
        open(path, "w").write("alpha,set,counts\n0.0,plus,5\n0.0,minus,3\n1.0,plus,4\n")
        with pytest.raises(InputDataError, match="minus"):
            read_cyclic_counts(path)

    def test_symbols_and_accumulation(self, tmp_path):
        path = str(tmp_path / "scan.csv")
        open(path, "w").write(
            "alpha,set,counts\n0.5,+,5\n0.5,-,3\n0.5,plus,2\n"
        )
        a, p, m = read_cyclic_counts(path)
        assert a.tolist() == [0.5]
        assert p.tolist() == [7.0]
        assert m.tolist() == [3.0]


class TestEnsembleEmission:
    def test_csv_is_plain_floats(self, tmp_path):
        result = run_haar_ensemble(3, gram_from_overlaps(0.7, 0.5, 0.9), draws=5)
        path = str(tmp_path / "draws.csv")
        write_ensemble_csv(path, result)
        lines = open(path).read().splitlines()
        assert lines[0] == "seed,p_fb,r_fb,sigma,sigma_d,avg_overlap_lb"
        assert len(lines) == 6
        assert "np." not in lines[1]
        first = lines[1].split(",")
        assert int(first[0]) == 0
        assert float(first[1]) == pytest.approx(result.p_fb[0])

    def test_histogram_csv(self, tmp_path):
        path = str(tmp_path / "hist.csv")
        write_histogram_csv(path, [0.0, 0.1, 0.2, 0.9, 1.0], bins=5)
        lines = open(path).read().splitlines()
        assert lines[0] == "bin_left,bin_right,count"
        assert len(lines) == 6
        total = sum(int(line.split(",")[2]) for line in lines[1:])
        assert total == 5

    def test_histogram_of_constant_series(self, tmp_path):
        # a zero-width data range must still produce a valid histogram
        path = str(tmp_path / "hist.csv")
        write_histogram_csv(path, [6.0] * 50, bins=4)
        lines = open(path).read().splitlines()
        assert len(lines) == 5
        total = sum(int(line.split(",")[2]) for line in lines[1:])
        assert total == 50


class TestUnitarySpecs:
    def test_builders(self):
        assert np.allclose(parse_unitary_spec("fourier:3"), fourier_unitary(3))
        assert np.allclose(parse_unitary_spec("identity:4"), np.eye(4))
        assert np.allclose(
            parse_unitary_spec("cyclic:alpha=0.7"), cyclic_unitary(0.7)
        )
        assert np.allclose(
            parse_unitary_spec("haar:3:seed=5"), haar_random_unitary(3, 5)
        )
        assert np.allclose(parse_unitary_spec("haar:3"), haar_random_unitary(3, 0))

    def test_file_path(self, tmp_path):
        u = haar_random_unitary(3, 11)
        path = str(tmp_path / "u.json")
        write_json(
            path, {"n": 3, "re": u.real.tolist(), "im": u.imag.tolist()}
        )
        assert np.allclose(parse_unitary_spec(path), u)

    def test_unknown_spec(self):
        with pytest.raises(InputDataError, match="neither a known builder"):
            parse_unitary_spec("warbler:3")

    def test_malformed_builder(self):
        with pytest.raises(InputDataError):
            parse_unitary_spec("fourier:x")
        with pytest.raises(InputDataError):
            parse_unitary_spec("cyclic:beta=0.7")


class TestObjectLoaders:
    def test_scenario_file(self, tmp_path):
        path = str(tmp_path / "scenario.json")
        s = gram_from_overlaps(0.875, 0.874, 0.848)
        write_json(path, scenario_to_json(s))
        assert np.allclose(read_scenario(path), s)

    def test_scenario_overlap_form(self, tmp_path):
        path = str(tmp_path / "scenario.json")
        write_json(
            path,
            {"n": 3, "overlaps": {"ab": 0.875, "ac": 0.874, "bc": 0.848}, "phase": 0.0},
        )
        assert np.allclose(
            read_scenario(path), gram_from_overlaps(0.875, 0.874, 0.848)
        )

    def test_noise_file(self, tmp_path):
        path = str(tmp_path / "noise.json")
        write_json(path, {"g2": 0.0218, "brightness": 0.23, "eta0": 0.1})
        params = read_noise(path)
        assert params == NoiseParameters.from_g2_brightness(0.0218, 0.23, eta0=0.1)

    def test_detection_file(self, tmp_path):
        path = str(tmp_path / "det.json")
        write_json(path, pnr_detection_efficiencies(eta=0.9).to_json())
        model = read_detection_model(path)
        assert isinstance(model, DetectionModel)
        assert model.efficiency((1, 1, 1)) == pytest.approx(0.9**3)
