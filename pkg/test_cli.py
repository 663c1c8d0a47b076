"""
Command Line Tests for verilocal
Tests the check, corners, pver and sample commands, their files and exit codes
"""

import json

import pytest

from errors import CornerSearchExhausted, InputParseError, ValidationError
from main import main, parse_grid

TRIANGLE = {"num_nodes": 3, "edges": [{"i": 1, "j": 2}, {"i": 2, "j": 3}, {"i": 1, "j": 3}]}
PENDANT = {
    "num_nodes": 4,
    "edges": [{"i": 1, "j": 2}, {"i": 2, "j": 3}, {"i": 1, "j": 3}, {"i": 3, "j": 4}],
    "epsilon": [["0"], ["0"], ["0"], ["1"]],
}


@pytest.fixture
def cli_env(clean_env):
    clean_env.setenv("VERILOCAL_THREADS", "1")
    return clean_env


@pytest.fixture
def run(cli_env, capsys):
    """Run main and return (exit code, parsed stdout or raw text)"""
    def _run(*argv):
        code = main(list(argv))
        out = capsys.readouterr().out
        try:
            return code, json.loads(out) if out else None
        except ValueError:
            return code, out
    return _run


@pytest.fixture
def triangle_files(write_json):
    return write_json("triangle.json", TRIANGLE), write_json("support.json", {"support": [{"edge": 3, "sign": "+"}]})


@pytest.mark.unit
class TestParseGrid:
    """Test the pmin:pmax:steps grid"""

    def test_inclusive(self):
        """Test both ends are included"""
        assert parse_grid("0:1:5") == [0, 0.25, 0.5, 0.75, 1]

    def test_single_point(self):
        """Test one step gives pmin"""
        assert parse_grid("1/4:1/2:1") == [0.25]

    @pytest.mark.parametrize("text", ["0:1", "a:1:3", "0:1:x"])
    def test_malformed(self, text):
        """Test malformed grids are parse errors"""
        with pytest.raises(InputParseError):
            parse_grid(text)

    @pytest.mark.parametrize("text", ["0:2:3", "1/2:1/4:3", "0:1:0"])
    def test_out_of_range(self, text):
        """Test grids outside [0,1] are validation errors"""
        with pytest.raises(ValidationError):
            parse_grid(text)


@pytest.mark.cli
@pytest.mark.critical
class TestCheckCommand:
    """Test classification of one instance"""

    def test_verifiable_triangle(self, run, triangle_files):
        """Test the triangle with one outlier is verifiable at cost 1"""
        graph, support = triangle_files
        code, report = run("check", graph, "--support", support)
        assert code == 0
        assert report["command"] == "check"
        assert report["result"]["classification"] == "Verifiable"
        assert report["result"]["optimal_cost"] == "1/1"
        assert set(report["inputs"]) == {"graph", "support"}
        dim = report["result"]["dimensions"][0]
        assert dim["dual"]["P_plus"][2] == "0/1"
        assert dim["dual"]["P_minus"][2] == "-1/1"

    def test_oracle_and_corners(self, run, triangle_files):
        """Test the oracle cross-check and corner listing"""
        graph, support = triangle_files
        code, report = run("check", graph, "--support", support, "--oracle", "--corners")
        dim = report["result"]["dimensions"][0]
        assert code == 0
        assert dim["oracle"] == {"optimal_cost": "1/1", "agrees": True}
        assert len(dim["corners"]) == 3

    def test_output_is_deterministic(self, run, triangle_files):
        """Test two runs print identical reports"""
        graph, support = triangle_files
        assert run("check", graph, "--support", support) == run("check", graph, "--support", support)

    def test_embedded_epsilon(self, run, write_json):
        """Test outliers from the graph file itself"""
        code, report = run("check", write_json("pendant.json", PENDANT))
        assert code == 0
        assert report["result"]["classification"] == "NonVerifiable"

    def test_missing_outliers(self, run, triangle_files):
        """Test a graph without outliers is a validation error"""
        code, report = run("check", triangle_files[0])
        assert code == 3
        assert report is None

    def test_unreadable_graph(self, run, tmp_path):
        """Test broken input exits with 2"""
        path = tmp_path / "broken.json"
        path.write_text("[")
        assert run("check", str(path))[0] == 2

    def test_disconnected_graph(self, run, write_json):
        """Test a disconnected graph exits with 3"""
        graph = write_json("g.json", {"num_nodes": 3, "edges": [{"i": 1, "j": 2}], "epsilon": [["0"]]})
        assert run("check", graph)[0] == 3

    def test_support_outside_graph(self, run, triangle_files, write_json):
        """Test supports must reference existing edges"""
        support = write_json("s.json", {"support": [{"edge": 9, "sign": "+"}]})
        assert run("check", triangle_files[0], "--support", support)[0] == 3

    def test_unexpected_failure(self, run, triangle_files, mocker):
        """Test unexpected exceptions exit with 4"""
        mocker.patch("main.solve_instance", side_effect=RuntimeError("boom"))
        graph, support = triangle_files
        assert run("check", graph, "--support", support)[0] == 4


@pytest.mark.cli
class TestCornersCommand:
    """Test corner enumeration from the command line"""

    def test_pendant_components(self, run, write_json):
        """Test the clean triangle is the verifiable component"""
        code, report = run("corners", write_json("pendant.json", PENDANT))
        assert code == 0
        assert report["result"]["classification"] == "NonVerifiable"
        assert report["result"]["components"] == [[1, 2, 3]]

    @pytest.mark.timeout(60)
    @pytest.mark.parametrize("first", ["0", "1"])
    def test_complete_graph_on_five_nodes(self, run, write_json, first):
        """Test K5, clean or with one unit outlier, pins every node"""
        edges = [{"i": i, "j": j} for i in range(1, 6) for j in range(i + 1, 6)]
        data = {"num_nodes": 5, "edges": edges, "epsilon": [[first]] + [["0"]] * 9}
        code, report = run("corners", write_json("k5.json", data))
        assert code == 0
        assert report["result"]["classification"] == "UniquelyVerifiable"
        assert report["result"]["components"] == [[1, 2, 3, 4, 5]]
        assert report["result"]["corners"] == [{"x": ["0/1"] * 5, "edge_costs": [first + "/1"] + ["0/1"] * 9}]

    def test_dims_mismatch(self, run, write_json):
        """Test --dims must match the outliers"""
        assert run("corners", write_json("pendant.json", PENDANT), "--dims", "2")[0] == 3

    def test_search_exhausted(self, run, write_json, mocker):
        """Test a corner cap overflow exits with 5"""
        mocker.patch("main.analyze_instance", side_effect=CornerSearchExhausted("too many corners"))
        assert run("corners", write_json("pendant.json", PENDANT))[0] == 5

    def test_two_dimensional_materialized(self, run, write_json):
        """Test materialized corners of a 2-D instance"""
        data = dict(TRIANGLE, epsilon=[["0", "0"], ["0", "0"], ["1", "0"]])
        code, report = run("corners", write_json("t2.json", data), "--materialize")
        assert code == 0
        assert report["result"]["classification"] == "Verifiable"
        assert len(report["result"]["corners"]) == 3


@pytest.mark.cli
@pytest.mark.integration
class TestPverCommand:
    """Test the verifiability probability command"""

    def test_exact_with_files(self, run, triangle_files, tmp_path):
        """Test exact p_Ver, census, polynomial and curve outputs"""
        census, curve, poly = tmp_path / "census.csv", tmp_path / "curve.csv", tmp_path / "poly.json"
        code, report = run(
            "pver", triangle_files[0], "--p-plus", "1/10", "--p-minus", "1/10", "--grid", "0:1:3",
            "--census-csv", str(census), "--curve-csv", str(curve), "--polynomial-json", str(poly),
        )
        assert code == 0
        result = report["result"]
        assert result["mode"] == "exact"
        assert result["p_ver"] == "473/500"
        assert result["model_is_symmetric"] is True
        assert result["polynomial"] == {"coeffs": [1, 6, 6, 2]}
        assert [point["p_ver"] for point in result["curve"]] == ["1/1", "23/32", "1/4"]
        assert census.read_text() == "k,total,verifiable,uniquely_verifiable\n0,1,1,1\n1,6,6,0\n2,12,6,0\n3,8,2,0\n"
        assert curve.read_text() == "p,p_ver\n0,1\n0.5,0.71875\n1,0.25\n"
        assert json.loads(poly.read_text()) == {"coeffs": [1, 6, 6, 2]}

    def test_census_without_model(self, run, triangle_files):
        """Test the census alone when no probabilities are given"""
        code, report = run("pver", triangle_files[0])
        assert code == 0
        assert "p_ver" not in report["result"]
        assert [row["verifiable"] for row in report["result"]["census"]] == [1, 6, 6, 2]

    def test_budget_exceeded(self, run, cli_env, triangle_files):
        """Test enumeration beyond the budget exits with 6"""
        cli_env.setenv("VERILOCAL_EXACT_BUDGET", "10")
        assert run("pver", triangle_files[0])[0] == 6

    def test_invalid_model(self, run, triangle_files):
        """Test probabilities summing to one are rejected"""
        assert run("pver", triangle_files[0], "--p-plus", "1/2", "--p-minus", "1/2")[0] == 3

    def test_monte_carlo_reproducible(self, run, triangle_files):
        """Test the same seed gives the same report"""
        argv = ("pver", triangle_files[0], "--p-plus", "1/10", "--p-minus", "1/10", "--samples", "200", "--seed", "5")
        first = run(*argv)
        assert first == run(*argv)
        code, report = first
        assert code == 0
        assert report["seed"] == 5
        assert report["result"]["estimate"]["samples"] == 200

    def test_monte_carlo_grid(self, run, triangle_files, tmp_path):
        """Test a Monte Carlo curve with confidence half-widths"""
        curve = tmp_path / "curve.csv"
        code, report = run("pver", triangle_files[0], "--samples", "50", "--grid", "1/4:3/4:2", "--curve-csv", str(curve))
        assert code == 0
        assert [point["p"] for point in report["result"]["curve"]] == ["1/4", "3/4"]
        assert curve.read_text().splitlines()[0] == "p,p_ver,ci95_half_width"

    def test_monte_carlo_grid_endpoints(self, run, triangle_files):
        """Test p = 0 is refused in Monte Carlo mode"""
        assert run("pver", triangle_files[0], "--samples", "50", "--grid", "0:1/2:2")[0] == 3

    def test_monte_carlo_needs_model(self, run, triangle_files):
        """Test sampling needs probabilities or a grid"""
        assert run("pver", triangle_files[0], "--samples", "50")[0] == 3


@pytest.mark.cli
class TestSampleCommand:
    """Test random instance generation"""

    def test_sample(self, run, triangle_files):
        """Test the sampled problem has one row per edge"""
        code, problem = run("sample", triangle_files[0], "--p-plus", "1/4", "--p-minus", "1/4", "--dims", "2", "--seed", "3")
        assert code == 0
        assert problem["num_nodes"] == 3
        assert len(problem["epsilon"]) == 3
        assert all(len(row) == 2 for row in problem["epsilon"])

    def test_sample_is_deterministic(self, run, triangle_files):
        """Test the seed fixes the sample"""
        argv = ("sample", triangle_files[0], "--p-plus", "1/4", "--p-minus", "1/4", "--seed", "8")
        assert run(*argv) == run(*argv)

    def test_sample_feeds_check(self, run, triangle_files, tmp_path):
        """Test sampled problems are valid check input"""
        target = tmp_path / "problem.json"
        code, _ = run("--output", str(target), "sample", triangle_files[0], "--p-plus", "1/4", "--p-minus", "1/4")
        assert code == 0
        assert run("check", str(target))[0] == 0


@pytest.mark.cli
class TestGlobalOptions:
    """Test flags shared by every command"""

    def test_output_file(self, run, triangle_files, tmp_path):
        """Test --output writes the report instead of printing"""
        target = tmp_path / "report.json"
        graph, support = triangle_files
        code, out = run("--output", str(target), "check", graph, "--support", support)
        assert code == 0
        assert out is None
        assert json.loads(target.read_text())["result"]["optimal_cost"] == "1/1"

    def test_timing(self, run, triangle_files):
        """Test timing appears only when requested"""
        graph, support = triangle_files
        assert "timing" not in run("check", graph, "--support", support)[1]
        assert "elapsed_seconds" in run("--timing", "check", graph, "--support", support)[1]["timing"]

    def test_trace(self, run, triangle_files, caplog):
        """Test --trace logs pivots"""
        graph, support = triangle_files
        with caplog.at_level("INFO", logger="lp_simplex.trace"):
            assert run("--trace", "check", graph, "--support", support)[0] == 0
        assert any(r.name == "lp_simplex.trace" for r in caplog.records)
