import hashlib
import subprocess
import sys
from pathlib import Path

import pytest

from icmde.cli import EXIT_OK, EXIT_USAGE, EXIT_VIOLATION, main

DATA = Path(__file__).parent / "data"
FAMILY = str(DATA / "family4.json")


def _run(argv, capsysbinary):
    code = main(argv)
    out, err = capsysbinary.readouterr()
    return code, out, err


class TestDispatch:
    def test_no_arguments(self, capsysbinary):
        code, out, err = _run([], capsysbinary)
        assert code == EXIT_USAGE and b"usage" in err

    def test_unknown_subcommand(self, capsysbinary):
        code, _, err = _run(["frobnicate"], capsysbinary)
        assert code == EXIT_USAGE and b"usage" in err

    def test_divergence_identical_is_zero(self, capsysbinary):
        code, out, _ = _run(["divergence", "--family", FAMILY, "--kind", "kl", "--from", "truth", "--to", "truth"], capsysbinary)
        assert code == EXIT_OK and out == b"0\n"

    def test_divergence_infinite(self, capsysbinary):
        code, out, _ = _run(["divergence", "--family", FAMILY, "--kind", "kl", "--from", "truth", "--to", "sparse"], capsysbinary)
        assert code == EXIT_OK and out == b"inf\n"

    def test_divergence_bad_rho(self, capsysbinary):
        code, _, err = _run(["divergence", "--family", FAMILY, "--kind", "rho", "--rho", "1.5", "--from", "truth", "--to", "near"], capsysbinary)
        assert code == EXIT_USAGE and err.count(b"\n") == 1

    def test_unknown_model_id(self, capsysbinary):
        code, _, err = _run(["divergence", "--family", FAMILY, "--kind", "kl", "--from", "truth", "--to", "zz"], capsysbinary)
        assert code == EXIT_USAGE and b"error" in err

    def test_missing_file(self, capsysbinary, tmp_path):
        code, _, err = _run(["divergence", "--family", str(tmp_path / "none.json"), "--kind", "kl", "--from", "truth", "--to", "truth"], capsysbinary)
        assert code == EXIT_USAGE and err.count(b"\n") == 1

    def test_fit_mdl(self, capsysbinary):
        code, out, _ = _run(["fit-mdl", "--family", FAMILY, "--data", str(DATA / "data6.json"), "--lambda", "1"], capsysbinary)
        assert code == EXIT_OK and out.startswith(b"id,objective\nnear,")

    def test_fit_gibbs(self, capsysbinary):
        code, out, _ = _run(["fit-gibbs", "--family", FAMILY, "--data", str(DATA / "data6.json")], capsysbinary)
        lines = out.decode().splitlines()
        assert code == EXIT_OK and lines[0] == "id,mass" and len(lines) == 6
        assert lines[4] == "sparse,0"
        assert abs(sum(float(r.split(",")[1]) for r in lines[1:]) - 1) < 1e-12

    def test_resolvability(self, capsysbinary):
        code, out, _ = _run(["resolvability", "--family", FAMILY, "--lambda", "2", "--n", "10"], capsysbinary)
        names = [r.split(",")[0] for r in out.decode().splitlines()[1:]]
        assert code == EXIT_OK and names == ["index_of_resolvability", "bayesian_resolvability", "prior_mass_bound", "critical_radius"]

    def test_resolvability_localized_needs_args(self, capsysbinary):
        code, _, _ = _run(["resolvability", "--family", FAMILY, "--lambda", "2", "--n", "10", "--localized"], capsysbinary)
        assert code == EXIT_USAGE


class TestVerify:
    ARGS = ["verify", "--family", FAMILY, "--bound", "cor3.2", "--lambda", "2", "--n", "20", "--reps", "500", "--seed", "11"]

    def test_golden(self, tmp_path, capsysbinary):
        out = tmp_path / "report.csv"
        assert main(self.ARGS + ["--out", str(out)]) == EXIT_OK
        assert out.read_bytes() == (DATA / "verify_global.golden.csv").read_bytes()

    def test_stdout_matches_file(self, capsysbinary):
        code, out, _ = _run(self.ARGS, capsysbinary)
        assert code == EXIT_OK and out == (DATA / "verify_global.golden.csv").read_bytes()

    def test_seed_required(self, capsysbinary):
        code, _, err = _run(self.ARGS[:-2], capsysbinary)
        assert code == EXIT_USAGE and b"--seed" in err

    def test_domain_error(self, capsysbinary):
        code, _, err = _run(["verify", "--family", FAMILY, "--bound", "cor3.2", "--lambda", "0.5", "--n", "5", "--seed", "1"], capsysbinary)
        assert code == EXIT_USAGE and err.count(b"\n") == 1

    def test_exact_too_large(self, capsysbinary):
        code, _, err = _run(self.ARGS + ["--exact"], capsysbinary)
        assert code == EXIT_USAGE and b"error" in err

    def test_exact_small(self, capsysbinary):
        code, out, _ = _run(["verify", "--family", FAMILY, "--bound", "thm2.1-exp", "--n", "4", "--seed", "0", "--exact"], capsysbinary)
        assert code == EXIT_OK and b",exact," in out

    def test_cover(self, capsysbinary):
        code, out, _ = _run(
            ["verify", "--family", FAMILY, "--bound", "thm5.2", "--n", "10", "--reps", "200", "--seed", "3", "--cover", str(DATA / "cover3.json")],
            capsysbinary,
        )
        assert code == EXIT_OK and out.decode().splitlines()[1].endswith("holds")

    def test_input_not_mutated(self, tmp_path):
        before = hashlib.sha256(Path(FAMILY).read_bytes()).hexdigest()
        main(self.ARGS + ["--out", str(tmp_path / "x.csv")])
        assert hashlib.sha256(Path(FAMILY).read_bytes()).hexdigest() == before


class TestExperimentsCommands:
    def test_counterexample_small(self, capsysbinary):
        code, out, _ = _run(["counterexample", "--n", "3", "--m", "15", "--reps", "200", "--seed", "7"], capsysbinary)
        header, row = out.decode().splitlines()
        assert header.startswith("n,m,replicates,p_correct") and row.startswith("3,15,200,")
        assert code in (EXIT_OK, EXIT_VIOLATION)

    def test_counterexample_infeasible(self, capsysbinary):
        code, _, err = _run(["counterexample", "--n", "8", "--m", "64", "--reps", "10", "--seed", "7"], capsysbinary)
        assert code == EXIT_USAGE and b"increase m" in err

    def test_rate_demo_small(self, capsysbinary):
        code, out, _ = _run(["rate-demo", "--ns", "16,64", "--reps", "20", "--seed", "3"], capsysbinary)
        lines = out.decode().splitlines()
        assert lines[0] == "n,N,global_entropy,localized_entropy,mdl_risk,mdl_risk_se,c1,c2" and len(lines) == 3

    def test_rate_demo_bad_ns(self, capsysbinary):
        code, _, _ = _run(["rate-demo", "--ns", "a,b", "--seed", "3"], capsysbinary)
        assert code == EXIT_USAGE

    def test_sweep(self, tmp_path, capsysbinary):
        out = tmp_path / "sweep.csv"
        code = main(["sweep", "--family", FAMILY, "--bounds", "cor3.2,thm5.1", "--grid", str(DATA / "grid.json"), "--reps", "200", "--seed", "11", "--out", str(out)])
        rows = out.read_text().splitlines()
        assert code == EXIT_OK and len(rows) == 13
        assert [r.split(",")[0] for r in rows[1:]] == ["cor3.2"] * 6 + ["thm5.1"] * 6

    def test_sweep_empty_grid(self, tmp_path, capsysbinary):
        grid = tmp_path / "g.json"
        grid.write_text('{"n": []}')
        code, out, _ = _run(["sweep", "--family", FAMILY, "--bounds", "cor3.2", "--grid", str(grid), "--seed", "1"], capsysbinary)
        assert code == EXIT_OK and out.count(b"\n") == 1

    def test_sweep_unknown_bound(self, capsysbinary):
        code, _, _ = _run(["sweep", "--family", FAMILY, "--bounds", "thm9.9", "--grid", str(DATA / "grid.json"), "--seed", "1"], capsysbinary)
        assert code == EXIT_USAGE


class TestProcess:
    def test_module_entry_point(self, tmp_path):
        out = tmp_path / "r.csv"
        res = subprocess.run([sys.executable, "-m", "icmde", *TestVerify.ARGS, "--out", str(out)], capture_output=True)
        assert res.returncode == 0 and res.stdout == b""
        assert out.read_bytes() == (DATA / "verify_global.golden.csv").read_bytes()

    @pytest.mark.parametrize(
        "argv",
        [
            ["counterexample", "--n", "3", "--m", "15", "--reps", "100", "--seed", "5"],
            ["rate-demo", "--ns", "16,36", "--reps", "30", "--seed", "5"],
            ["sweep", "--family", FAMILY, "--bounds", "thm4.1", "--grid", str(DATA / "grid.json"), "--reps", "100", "--seed", "5"],
        ],
    )
    def test_byte_identical_reruns(self, argv, tmp_path):
        outs = []
        for i in range(2):
            p = tmp_path / f"o{i}.csv"
            subprocess.run([sys.executable, "-m", "icmde", *argv, "--out", str(p)], check=False, capture_output=True)
            outs.append(p.read_bytes())
        assert outs[0] == outs[1] and outs[0].count(b"\n") >= 2
