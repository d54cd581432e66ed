import json

from sparsegauss.cli import main
from sparsegauss.numerics import default_bits


def run(tmp_path, argv, name="out.txt"):
    out = tmp_path / name
    code = main(argv + ["--output", str(out)])
    text = out.read_text() if out.exists() else ""
    return code, text


def test_coeff_paper_format(tmp_path):
    code, text = run(tmp_path, ["coeff", "--dim", "2", "-n", "40", "--k", "1,1",
                                "--format", "paper"])
    assert code == 0
    # exact rendering of the coefficient; the printed table cell 8.69 (-21)
    # sits one final digit below the half-even rounding of the true value
    assert text == "8.70 (-21)  9.67 (-21)\n"


def test_coeff_json_record(tmp_path):
    code, text = run(tmp_path, ["coeff", "--dim", "2", "-n", "40", "--k", "1,1",
                                "--format", "json"])
    assert code == 0
    record = json.loads(text)
    assert record["n"] == 40 and record["d"] == 2 and record["k"] == [1, 1]
    assert record["value"] == "8.70 (-21)"
    assert record["asymptotic"] == "9.67 (-21)"
    assert record["bits"] == default_bits(40, 2)
    assert 0.89 < record["ratio"] < 0.90
    # round trip: parse -> re-dump with sorted keys -> identical bytes
    assert json.dumps(record, sort_keys=True) + "\n" == text


def test_coeff_paper_format_3d(tmp_path):
    code, text = run(tmp_path, ["coeff", "--dim", "3", "-n", "80",
                                "--k", "500,700,900", "--format", "paper"])
    assert code == 0
    # exact computed value 3.0535e-25 (MPFR cross-checked); the published
    # table's computed cell reads 4.62 (-25), the formula cell matches
    assert text == "3.05 (-25)  9.40 (-25)\n"


def test_coeff_zero_mode(tmp_path):
    code, text = run(tmp_path, ["coeff", "--dim", "2", "-n", "40", "--k", "0,0",
                                "--format", "json"])
    assert code == 0
    assert json.loads(text)["value"] == "0"


def test_coeff_usage_errors(tmp_path):
    code, _ = run(tmp_path, ["coeff", "--dim", "3", "-n", "10", "--k", "1,1"])
    assert code == 2
    code, _ = run(tmp_path, ["coeff", "--dim", "1", "-n", "10", "--k", "1"])
    assert code == 2


def test_coeff_precision_policy_exit_codes(tmp_path, monkeypatch):
    argv = ["coeff", "--dim", "2", "-n", "40", "--k", "1,1", "--bits", "100"]
    code, _ = run(tmp_path, argv)
    assert code == 3
    code, text = run(tmp_path, argv + ["--force", "--format", "json"])
    assert code == 0
    assert json.loads(text)["reliable"] is False

    monkeypatch.setenv("SPARSEGAUSS_BITS", "100")
    code, _ = run(tmp_path, ["coeff", "--dim", "2", "-n", "40", "--k", "1,1"])
    assert code == 3
    monkeypatch.setenv("SPARSEGAUSS_BITS", "512")
    code, _ = run(tmp_path, ["coeff", "--dim", "2", "-n", "40", "--k", "1,1"])
    assert code == 0


def test_config_file_merging(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("bits = 100\nformat = json\n")
    argv = ["coeff", "--dim", "2", "-n", "40", "--k", "1,1", "--config", str(cfg)]
    code, _ = run(tmp_path, argv)
    assert code == 3  # config bits too low, no force
    # flags win over config
    code, text = run(tmp_path, argv + ["--bits", "300"])
    assert code == 0
    assert json.loads(text)["bits"] == 300


def test_table_custom_rows(tmp_path):
    code, text = run(tmp_path, ["table", "--dim", "2", "--k", "1,1",
                                "--n-list", "10,20"])
    assert code == 0
    lines = text.strip().splitlines()
    assert lines[0] == "n,k,value,asymptotic"
    assert len(lines) == 3
    assert lines[1].startswith("10,1 1,")
    # formula column = asymptotic values through the same pipeline
    from sparsegauss.sparse_combination import sparse_error_coeff

    expected = sparse_error_coeff(10, 2, (1, 1)).asymptotic_str()
    assert lines[1].split(",")[3] == expected


def test_bad_flag_values(tmp_path):
    code, _ = run(tmp_path, ["converge", "--mode", "full", "--family",
                             "product_cosine", "--dim", "2", "--n-range", "7:4"])
    assert code == 2
    code, _ = run(tmp_path, ["coeff", "--dim", "2", "-n", "8", "--k", "1,x"])
    assert code == 2
    code, _ = run(tmp_path, ["table", "--dim", "2", "--k", "1,1"])
    assert code == 2  # missing --n-list
    code, _ = run(tmp_path, ["coeff", "--dim", "2", "-n", "8", "--k", "1,1",
                             "--config", str(tmp_path / "missing.cfg")])
    assert code == 2


def test_table_preset_table1(tmp_path):
    code, text = run(tmp_path, ["table", "--preset", "table1", "--format", "paper"])
    assert code == 0
    lines = text.strip().splitlines()
    assert len(lines) == 6  # header + five levels
    assert lines[1].split()[0] == "40"
    # formula column entries match the asymptotic law renderings
    assert "9.67 (-21)" in lines[1]
    assert "8.98 (-381)" in lines[5] and "1.10 (-369)" in lines[5]


def test_converge_constant_all_zero(tmp_path):
    code, text = run(tmp_path, ["converge", "--mode", "full", "--family", "constant",
                                "--dim", "2", "--n-range", "2:4"])
    assert code == 0
    lines = text.strip().splitlines()
    assert lines[0] == "n,error,log2_ratio"
    assert [line.split(",")[1] for line in lines[1:]] == ["0", "0", "0"]


def test_converge_full_product_cosine(tmp_path):
    code, text = run(tmp_path, ["converge", "--mode", "full", "--family",
                                "product_cosine", "--dim", "2",
                                "--n-range", "5:7", "--resolution", "32"])
    assert code == 0
    rows = text.strip().splitlines()[1:]
    ratios = [float(r.split(",")[2]) for r in rows if r.split(",")[2]]
    assert all(abs(v - 2.0) < 0.06 for v in ratios)


def test_converge_sparse_mode(tmp_path):
    code, text = run(tmp_path, ["converge", "--mode", "sparse", "--family",
                                "product_cosine", "--dim", "2",
                                "--n-range", "20:22", "--resolution", "16"])
    assert code == 0
    rows = text.strip().splitlines()[1:]
    ratios = [float(r.split(",")[2]) for r in rows if r.split(",")[2]]
    # error ratio ~ ((n+1)/n)/4 means log2 ratio ~ 2 - log2((n+1)/n)
    assert all(1.8 < v < 2.0 for v in ratios)


def test_converge_rejects_bad_family_args(tmp_path):
    code, _ = run(tmp_path, ["converge", "--mode", "full", "--family",
                             "beta_decay_random", "--dim", "2", "--n-range", "2:3"])
    assert code == 2


def test_sigma_exact_output(tmp_path):
    code, text = run(tmp_path, ["sigma", "--dim", "2", "-p", "1", "-m", "3",
                                "--k", "1,1"])
    assert code == 0
    assert text.splitlines()[0] == "5/8"

    code, text = run(tmp_path, ["sigma", "--dim", "2", "-p", "0", "-m", "7",
                                "--k", "1,1"])
    assert code == 0
    assert text.splitlines()[0] == "6"


def test_sigma_check_all(tmp_path):
    code, text = run(tmp_path, ["sigma", "--dim", "2", "-p", "2", "-m", "5",
                                "--k", "1,1", "--check", "all", "--format", "json"])
    assert code == 0
    record = json.loads(text)
    assert record["oracles"] == ["bruteforce", "closed_d2", "recurrence"]

    code, text = run(tmp_path, ["sigma", "--dim", "3", "-p", "2", "-m", "7",
                                "--k", "1,2,3", "--check", "all"])
    assert code == 0
    assert "oracles agree: bruteforce,recurrence" in text


def test_sigma_usage_error(tmp_path):
    code, _ = run(tmp_path, ["sigma", "--dim", "3", "-p", "1", "-m", "2",
                             "--k", "1,1,1"])
    assert code == 2


def test_sigma_oracle_disagreement_exit_code(tmp_path, monkeypatch):
    # a cross-check failure is a hard abort with exit code 4
    from fractions import Fraction

    import sparsegauss.cli as cli_mod
    from sparsegauss.sigma_oracle import SigmaValue

    def broken(d, p, m, k):
        return SigmaValue(d, p, m, tuple(k[:d]), Fraction(1, 7))

    monkeypatch.setattr(cli_mod.sigma_oracle, "sigma_recurrence", broken)
    code, _ = run(tmp_path, ["sigma", "--dim", "2", "-p", "1", "-m", "3",
                             "--k", "1,1", "--check", "all"])
    assert code == 4


def test_grid_stats(tmp_path):
    code, text = run(tmp_path, ["grid", "--dim", "2", "-n", "4", "--stats"])
    assert code == 0
    lines = text.strip().splitlines()
    assert lines[0] == "full_nodes,sparse_nodes,signed_multiplicity_ok"
    assert lines[1] == "289,113,true"

    code, text = run(tmp_path, ["grid", "--dim", "3", "-n", "1", "--stats",
                                "--format", "json"])
    assert code == 0
    record = json.loads(text)
    assert record == {
        "full_nodes": 27, "sparse_nodes": 27, "signed_multiplicity_ok": True
    }


def test_grid_list_exact_fractions(tmp_path):
    code, text = run(tmp_path, ["grid", "--dim", "2", "-n", "3", "--list"])
    assert code == 0
    lines = text.strip().splitlines()
    assert lines[0] == "x_1,x_2"
    assert lines[1] == "0/1,0/1"
    assert all(len(line.split(",")) == 2 for line in lines[1:])
    assert "1/2,1/8" in lines


def test_grid_usage(tmp_path):
    code, _ = run(tmp_path, ["grid", "--dim", "1", "-n", "3", "--stats"])
    assert code == 2
    code, _ = run(tmp_path, ["grid", "--dim", "2", "-n", "3"])
    assert code == 2


def test_byte_identical_reruns(tmp_path):
    argv = ["coeff", "--dim", "2", "-n", "12", "--k", "1,2", "--format", "json"]
    _, first = run(tmp_path, argv, name="a.txt")
    _, second = run(tmp_path, argv, name="b.txt")
    assert first == second

    argv = ["table", "--dim", "2", "--k", "2,3", "--n-list", "8,9"]
    _, first = run(tmp_path, argv, name="c.txt")
    _, second = run(tmp_path, argv, name="d.txt")
    assert first == second
