import json
import os

import numpy as np
import pytest

from obliqueframes import ParseError
from obliqueframes.cli import main
from obliqueframes.serialize import (
    measure_from_obj,
    parse_fixture,
    serialize_fixture,
)

FIXTURES = os.path.join(os.path.dirname(__file__), "..", "fixtures")

ALL_FIXTURES = [
    ("skew_line_w.json", "subspace"),
    ("skew_line_v.json", "subspace"),
    ("skew_line_frame.json", "frame"),
    ("skew_line_pair.json", "pair"),
    ("skew_line_mu.json", "measure"),
    ("skew_line_nu.json", "measure"),
    ("skew_line_product_coupling.json", "coupling"),
    ("plane.json", "subspace"),
    ("mercedes_benz_frame.json", "frame"),
    ("mercedes_benz_pair.json", "pair"),
    ("mercedes_benz_measure.json", "measure"),
    ("standard_basis_2.json", "frame"),
]


def fixture(name):
    return os.path.join(FIXTURES, name)


class TestRoundTrip:
    @pytest.mark.parametrize("name,kind", ALL_FIXTURES)
    def test_every_shipped_fixture_round_trips_byte_identically(self, name, kind):
        path = fixture(name)
        value = parse_fixture(path, kind)
        with open(path) as fh:
            original = fh.read()
        assert serialize_fixture(value) == original

    def test_seventeen_digit_floats_survive(self, tmp_path):
        mu = measure_from_obj({
            "ambient_dim": 1,
            "points": [[0.1], [np.pi]],
            "weights": [1.0 / 3.0, 2.0 / 3.0],
        })
        path = tmp_path / "mu.json"
        serialize_fixture(mu, str(path))
        back = parse_fixture(str(path), "measure")
        assert back.points[0, 0] == 0.1
        assert back.points[1, 0] == np.pi
        assert back.weights[0] == 1.0 / 3.0


class TestParseErrors:
    def test_missing_weights_field_is_named(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text(json.dumps({"ambient_dim": 1, "points": [[1.0]]}))
        with pytest.raises(ParseError, match="weights"):
            parse_fixture(str(path), "measure")

    def test_unnormalized_weights_cite_the_invariant(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text(json.dumps({
            "ambient_dim": 1,
            "points": [[1.0], [2.0]],
            "weights": [0.5, 0.4],
        }))
        with pytest.raises(ParseError, match="sum"):
            parse_fixture(str(path), "measure")

    def test_malformed_json_reports_location(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{not json")
        with pytest.raises(ParseError, match="line"):
            parse_fixture(str(path), "coupling")

    def test_missing_file(self):
        with pytest.raises(ParseError, match="not found"):
            parse_fixture("/nonexistent/mu.json", "measure")

    def test_ragged_matrix(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text(json.dumps({"ambient_dim": 2,
                                    "basis": [[1.0, 0.0], [0.0]]}))
        with pytest.raises(ParseError, match="ragged"):
            parse_fixture(str(path), "subspace")


def run_cli(*argv, out=None):
    args = list(argv)
    if out is not None:
        args = ["--out", str(out)] + args
    return main(args)


def load_report(path):
    with open(path) as fh:
        return json.load(fh)


class TestCli:
    def test_check_dual_on_the_skew_line_pair(self, tmp_path):
        out = tmp_path / "r.json"
        code = run_cli("check-dual", fixture("skew_line_pair.json"), out=out)
        assert code == 0
        rep = load_report(out)
        assert rep["is_dual"] is True
        assert rep["residual"] < 1e-12

    def test_potential_on_mercedes_benz(self, tmp_path):
        out = tmp_path / "r.json"
        code = run_cli("potential", fixture("mercedes_benz_pair.json"),
                       "--p", "2", out=out)
        assert code == 0
        rep = load_report(out)
        assert rep["value"] == pytest.approx(2.0, abs=1e-12)
        assert rep["lower_bound"] == pytest.approx(2.0)
        assert rep["saturated"] is True

    def test_w2_of_identical_measures(self, tmp_path):
        out = tmp_path / "r.json"
        code = run_cli("w2", fixture("skew_line_mu.json"),
                       fixture("skew_line_mu.json"), out=out)
        assert code == 0
        rep = load_report(out)
        assert rep["distance"] == 0.0
        assert rep["certificate"]["dual_gap"] <= 1e-9

    def test_frame_info(self, tmp_path):
        out = tmp_path / "r.json"
        assert run_cli("frame-info", fixture("mercedes_benz_frame.json"),
                       out=out) == 0
        rep = load_report(out)
        assert rep["lower_bound"] == pytest.approx(1.5, abs=1e-12)
        assert rep["tight"] is True

    def test_oblique_dual_then_check(self, tmp_path):
        pair_path = tmp_path / "pair.json"
        assert run_cli("oblique-dual", fixture("skew_line_frame.json"),
                       fixture("skew_line_v.json"), out=pair_path) == 0
        out = tmp_path / "r.json"
        assert run_cli("check-dual", str(pair_path), out=out) == 0
        assert load_report(out)["is_dual"] is True

    def test_coherence_emits_signature(self, tmp_path):
        out = tmp_path / "r.json"
        assert run_cli("coherence", fixture("mercedes_benz_pair.json"),
                       out=out) == 0
        rep = load_report(out)
        assert rep["max_off_diagonal_sq"] == pytest.approx(1.0 / 9.0)
        assert rep["signature"] is not None

    def test_etf_lift(self, tmp_path):
        out = tmp_path / "r.json"
        assert run_cli("etf-lift", fixture("mercedes_benz_frame.json"),
                       out=out) == 0
        assert load_report(out)["is_equiangular_tight"] is True

    def test_minimize(self, tmp_path):
        out = tmp_path / "r.json"
        assert run_cli("minimize", fixture("mercedes_benz_frame.json"),
                       fixture("plane.json"), "--seed", "3", out=out) == 0
        rep = load_report(out)
        assert rep["trajectory"][-1] == pytest.approx(2.0, abs=1e-6)

    def test_pf_classify(self, tmp_path):
        out = tmp_path / "r.json"
        assert run_cli("pf-classify", fixture("mercedes_benz_measure.json"),
                       fixture("plane.json"), out=out) == 0
        rep = load_report(out)
        assert rep["is_tight"] is True
        assert rep["bounds"] == pytest.approx([0.5, 0.5])

    def test_pf_dual_and_check(self, tmp_path):
        dual_path = tmp_path / "dual.json"
        assert run_cli("pf-dual", fixture("skew_line_mu.json"),
                       fixture("skew_line_w.json"),
                       fixture("skew_line_v.json"), out=dual_path) == 0
        rep = load_report(dual_path)
        assert rep["dual"]["points"][0] == pytest.approx([1.0, 1.0], abs=1e-12)

    def test_pf_check(self, tmp_path):
        out = tmp_path / "r.json"
        assert run_cli("pf-check", fixture("skew_line_mu.json"),
                       fixture("skew_line_nu.json"),
                       fixture("skew_line_product_coupling.json"),
                       out=out) == 0
        rep = load_report(out)
        assert rep["is_dual"] is True
        assert rep["residual"] < 1e-12

    def test_pf_potential(self, tmp_path):
        out = tmp_path / "r.json"
        assert run_cli("pf-potential", fixture("skew_line_mu.json"),
                       fixture("skew_line_nu.json"), "--mode", "general",
                       out=out) == 0
        rep = load_report(out)
        assert rep["value"] == pytest.approx(2.0)
        assert rep["lower_bound"] == pytest.approx(1.0)

    def test_approx_check(self, tmp_path):
        out = tmp_path / "r.json"
        assert run_cli("approx-check", fixture("skew_line_mu.json"),
                       fixture("skew_line_nu.json"),
                       fixture("skew_line_product_coupling.json"),
                       fixture("skew_line_w.json"),
                       fixture("skew_line_v.json"), out=out) == 0
        assert load_report(out)["epsilon_residual"] < 1e-12

    def test_glue_with_identity(self, tmp_path):
        ident = tmp_path / "ident.json"
        nu = parse_fixture(fixture("skew_line_nu.json"), "measure")
        from obliqueframes import identity_coupling
        serialize_fixture(identity_coupling(nu), str(ident))
        out = tmp_path / "r.json"
        assert run_cli("glue", fixture("skew_line_product_coupling.json"),
                       str(ident), out=out) == 0
        assert len(load_report(out)["triples"]) == 2

    def test_interiority_writes_csv(self, tmp_path):
        out = tmp_path / "r.json"
        csv_path = tmp_path / "trials.csv"
        assert run_cli("interiority", fixture("mercedes_benz_measure.json"),
                       fixture("plane.json"), fixture("plane.json"),
                       "--eps", "0.1", "--trials", "5", "--seed", "1",
                       "--csv", str(csv_path), out=out) == 0
        rep = load_report(out)
        assert rep["failures"] == 0
        lines = csv_path.read_text().strip().splitlines()
        assert lines[0] == "trial,lambda,eps_claimed,eps_actual,pass"
        assert len(lines) == 6

    def test_perturb(self, tmp_path):
        from obliqueframes import Coupling, DiscreteMeasure
        nu = parse_fixture(fixture("skew_line_nu.json"), "measure")
        eta = DiscreteMeasure([[0.05, 0.05], [2.05, 2.05]], [0.5, 0.5])
        pert = Coupling(nu.points, eta.points, [0.5, 0.5], nu, eta)
        eta_path = tmp_path / "eta.json"
        pert_path = tmp_path / "pert.json"
        serialize_fixture(eta, str(eta_path))
        serialize_fixture(pert, str(pert_path))
        out = tmp_path / "r.json"
        assert run_cli("perturb", fixture("skew_line_mu.json"),
                       fixture("skew_line_nu.json"),
                       fixture("skew_line_product_coupling.json"),
                       str(eta_path), str(pert_path),
                       "--eps", "0.1", out=out) == 0
        rep = load_report(out)
        assert rep["epsilon_actual"] <= 0.1

    def test_validation_error_exits_2(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text("{} ")
        assert run_cli("check-dual", str(bad)) == 2

    def test_hypothesis_violation_exits_3(self, tmp_path):
        from obliqueframes import Coupling, DiscreteMeasure
        nu = parse_fixture(fixture("skew_line_nu.json"), "measure")
        eta = DiscreteMeasure([[1.0, 1.0], [3.0, 3.0]], [0.5, 0.5])
        pert = Coupling(nu.points, eta.points, [0.5, 0.5], nu, eta)
        eta_path = tmp_path / "eta.json"
        pert_path = tmp_path / "pert.json"
        serialize_fixture(eta, str(eta_path))
        serialize_fixture(pert, str(pert_path))
        assert run_cli("perturb", fixture("skew_line_mu.json"),
                       fixture("skew_line_nu.json"),
                       fixture("skew_line_product_coupling.json"),
                       str(eta_path), str(pert_path), "--eps", "0.1") == 3

    def test_nonconvergence_exits_4(self):
        assert run_cli("minimize", fixture("mercedes_benz_frame.json"),
                       fixture("plane.json"), "--max-iters", "1",
                       "--grad-tol", "1e-30") == 4

    def test_dimension_mismatch_exits_2(self):
        assert run_cli("w2", fixture("skew_line_mu.json"),
                       fixture("mercedes_benz_frame.json")) == 2
