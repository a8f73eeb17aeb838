import json

import numpy as np
import pytest

import greedylab as gl
from greedylab.cli import main


def run_cli(capsys, *args):
    code = main(list(args))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


@pytest.fixture(scope="module")
def dict_file(tmp_path_factory):
    path = tmp_path_factory.mktemp("dicts") / "d.bin"
    gl.save_dictionary(gl.gen_perturbed_identity(30, 1e-3, 6), path)
    return str(path)


@pytest.fixture(scope="module")
def target_file(tmp_path_factory):
    path = tmp_path_factory.mktemp("targets") / "f.csv"
    gl.save_vector_csv(np.random.default_rng(0).standard_normal(30), path)
    return str(path)


class TestDictCommands:
    def test_gen_binary_with_manifest(self, capsys, tmp_path):
        out = tmp_path / "d.bin"
        code, stdout, _ = run_cli(
            capsys, "dict", "gen", "--kind", "perturbed-identity",
            "--n", "30", "--eps", "1e-3", "--seed", "6", "-o", str(out),
        )
        assert code == 0
        payload = json.loads(stdout)
        assert payload["m"] == 30 and payload["num_atoms"] == 30
        loaded = gl.load_dictionary(out)
        assert loaded.atoms.tobytes() == gl.gen_perturbed_identity(30, 1e-3, 6).atoms.tobytes()
        manifest = json.loads((tmp_path / "d.bin.manifest.json").read_text())
        assert set(manifest) == {
            "command", "argv", "seed", "version", "outputs", "duration_seconds",
        }
        assert manifest["seed"] == 6

    def test_gen_csv_format(self, capsys, tmp_path):
        out = tmp_path / "d.csv"
        code, stdout, _ = run_cli(
            capsys, "dict", "gen", "--kind", "gaussian",
            "--m", "5", "--n", "8", "--seed", "3", "-o", str(out),
        )
        assert code == 0 and json.loads(stdout)["format"] == "csv"
        assert gl.load_dictionary_csv(out).num_atoms == 8

    def test_gen_union(self, capsys, tmp_path):
        out = tmp_path / "u.bin"
        code, stdout, _ = run_cli(
            capsys, "dict", "gen", "--kind", "union-of-bases",
            "--m", "6", "--seed", "2", "-o", str(out),
        )
        assert code == 0 and json.loads(stdout)["num_atoms"] == 12

    def test_gen_usage_error_exit_2(self, capsys, tmp_path):
        with pytest.raises(SystemExit) as exc:
            main(["dict", "gen", "--kind", "gaussian", "--m", "0", "--n", "5",
                  "--seed", "1", "-o", str(tmp_path / "x.bin")])
        assert exc.value.code == 2

    def test_gen_missing_param_exit_2(self, capsys, tmp_path):
        code, _, err = run_cli(
            capsys, "dict", "gen", "--kind", "perturbed-identity",
            "--n", "10", "--seed", "1", "-o", str(tmp_path / "x.bin"),
        )
        assert code == 2
        assert json.loads(err.splitlines()[0])["error"] == "ValueError"

    def test_coherence_matches_library(self, capsys, dict_file):
        code, stdout, _ = run_cli(capsys, "dict", "coherence", dict_file)
        assert code == 0
        assert json.loads(stdout)["mu"] == gl.coherence(gl.load_dictionary(dict_file))

    def test_info(self, capsys, dict_file):
        code, stdout, _ = run_cli(capsys, "dict", "info", dict_file)
        payload = json.loads(stdout)
        assert code == 0 and payload["m"] == 30
        assert abs(payload["max_column_norm"] - 1.0) <= 1e-12


class TestRipCommand:
    def test_exact_matches_library(self, capsys, dict_file):
        code, stdout, _ = run_cli(capsys, "rip", "--dict", dict_file, "--exact", "2")
        assert code == 0
        expected = gl.rip_exact(gl.load_dictionary(dict_file), 2).to_json_dict()
        assert json.loads(stdout) == expected

    def test_sampled_requires_seed(self, capsys, dict_file):
        code, _, err = run_cli(capsys, "rip", "--dict", dict_file, "--sampled", "2")
        assert code == 2

    def test_sampled_and_bound(self, capsys, dict_file):
        code, stdout, _ = run_cli(
            capsys, "rip", "--dict", dict_file, "--sampled", "2",
            "--trials", "20", "--seed", "1",
        )
        assert code == 0 and json.loads(stdout)["kind"] == "sampled_lower_bound"
        code, stdout, _ = run_cli(capsys, "rip", "--dict", dict_file, "--bound", "3")
        assert code == 0 and json.loads(stdout)["kind"] == "coherence_upper_bound"

    def test_budget_exceeded_exit_1(self, capsys, dict_file):
        code, _, err = run_cli(capsys, "rip", "--dict", dict_file, "--exact", "15")
        assert code == 1
        payload = json.loads(err.splitlines()[0])
        assert payload["error"] == "EnumerationBudgetExceeded"

    def test_budget_override(self, capsys, dict_file):
        # a tighter budget trips the guard on an otherwise affordable order
        code, _, err = run_cli(
            capsys, "rip", "--dict", dict_file, "--exact", "3", "--budget", "100"
        )
        assert code == 1
        payload = json.loads(err.splitlines()[0])
        assert payload["error"] == "EnumerationBudgetExceeded"
        # and a looser one admits it
        code, stdout, _ = run_cli(
            capsys, "rip", "--dict", dict_file, "--exact", "3", "--budget", "5000"
        )
        assert code == 0 and json.loads(stdout)["subsets_examined"] == 4060

    def test_workers_do_not_change_output(self, capsys, dict_file):
        _, base, _ = run_cli(capsys, "rip", "--dict", dict_file, "--exact", "3")
        _, multi, _ = run_cli(
            capsys, "rip", "--dict", dict_file, "--exact", "3", "--workers", "2"
        )
        assert base == multi


class TestRunCommand:
    def test_omp_matches_library(self, capsys, dict_file, target_file):
        code, stdout, _ = run_cli(
            capsys, "run", "--algo", "omp", "--dict", dict_file,
            "--target", target_file, "--steps", "4",
        )
        assert code == 0
        d = gl.load_dictionary(dict_file)
        expected = gl.run_omp(d, gl.load_vector_csv(target_file), 4).to_json_dict()
        assert json.loads(stdout) == expected

    def test_pga_and_adversarial_womp(self, capsys, dict_file, target_file):
        code, stdout, _ = run_cli(
            capsys, "run", "--algo", "pga", "--dict", dict_file,
            "--target", target_file, "--steps", "3",
        )
        assert code == 0 and json.loads(stdout)["algorithm"] == "pga"
        code, stdout, _ = run_cli(
            capsys, "run", "--algo", "womp", "--dict", dict_file,
            "--target", target_file, "--steps", "3",
            "--kappa", "0.5", "--mode", "adversarial-weak",
        )
        assert code == 0 and json.loads(stdout)["kappa"] == 0.5

    def test_output_files(self, capsys, dict_file, target_file, tmp_path):
        res = tmp_path / "r.csv"
        coef = tmp_path / "c.csv"
        code, _, _ = run_cli(
            capsys, "run", "--algo", "omp", "--dict", dict_file,
            "--target", target_file, "--steps", "4",
            "--residual-out", str(res), "--coefficients-out", str(coef),
        )
        assert code == 0
        assert gl.load_vector_csv(res).shape == (30,)
        assert gl.load_sparse_vector(coef).sparsity == 4
        assert (tmp_path / "r.csv.manifest.json").exists()
        assert (tmp_path / "c.csv.manifest.json").exists()


class TestOracleCommand:
    def test_best_n_term(self, capsys, dict_file, target_file):
        code, stdout, _ = run_cli(
            capsys, "oracle", "--dict", dict_file, "--target", target_file, "--n", "2"
        )
        assert code == 0
        d = gl.load_dictionary(dict_file)
        expected = gl.best_n_term(d, gl.load_vector_csv(target_file), 2).to_json_dict()
        assert json.loads(stdout) == expected

    def test_profile(self, capsys, dict_file, target_file):
        code, stdout, _ = run_cli(
            capsys, "oracle", "--dict", dict_file, "--target", target_file,
            "--n", "3", "--profile",
        )
        payload = json.loads(stdout)
        assert code == 0 and len(payload["sigmas"]) == 4


class TestCertifyCommands:
    def test_lemma_decay(self, capsys, dict_file):
        code, stdout, _ = run_cli(
            capsys, "certify", "lemma-decay", "--dict", dict_file,
            "--n", "2", "--steps", "4", "--trials", "3", "--seed", "0",
        )
        payload = json.loads(stdout)
        assert code == 0 and payload["passed"] and payload["violations"] == []

    def test_prop_iterate(self, capsys, dict_file):
        code, stdout, _ = run_cli(
            capsys, "certify", "prop-iterate", "--dict", dict_file,
            "--n", "2", "--trials", "3", "--seed", "0",
        )
        assert code == 0 and json.loads(stdout)["passed"]

    def test_instance_opt_and_postprocess(self, capsys, tmp_path):
        path = tmp_path / "wide.bin"
        gl.save_dictionary(gl.gen_perturbed_identity(120, 2e-4, 2), path)
        for sub in ("instance-opt", "postprocess"):
            code, stdout, _ = run_cli(
                capsys, "certify", sub, "--dict", str(path),
                "--n", "1", "--trials", "2", "--seed", "0",
            )
            payload = json.loads(stdout)
            assert code == 0 and payload["passed"] and payload["skipped"] == 0

    def test_instance_opt_skipped_only_passes(self, capsys, tmp_path):
        path = tmp_path / "incoherent.bin"
        gl.save_dictionary(gl.gen_gaussian(110, 110, 0), path)
        code, stdout, _ = run_cli(
            capsys, "certify", "instance-opt", "--dict", str(path),
            "--n", "1", "--trials", "3", "--seed", "0",
        )
        payload = json.loads(stdout)
        assert code == 0 and payload["skipped"] == 3 and payload["instances_run"] == 0

    def test_tropp_pass_and_hypothesis_failure(self, capsys, dict_file, tmp_path):
        code, stdout, _ = run_cli(
            capsys, "certify", "tropp", "--dict", dict_file,
            "--n", "3", "--trials", "10", "--seed", "0",
        )
        assert code == 0 and json.loads(stdout)["details"]["successes"] == 10
        pair = tmp_path / "pair.bin"
        atoms = np.array([[1.0, 0.9], [0.0, np.sqrt(1 - 0.81)]])
        gl.save_dictionary(gl.Dictionary(atoms), pair)
        code, _, err = run_cli(
            capsys, "certify", "tropp", "--dict", str(pair),
            "--n", "2", "--trials", "5", "--seed", "0",
        )
        assert code == 1
        assert json.loads(err.splitlines()[0])["error"] == "HypothesisUnmet"

    def test_livschitz(self, capsys, dict_file):
        code, stdout, _ = run_cli(
            capsys, "certify", "livschitz", "--dict", dict_file,
            "--n", "1", "--trials", "3", "--seed", "0",
        )
        assert code == 0 and json.loads(stdout)["passed"]

    def test_workers_flag_accepted(self, capsys, dict_file):
        code, stdout, _ = run_cli(
            capsys, "certify", "lemma-decay", "--dict", dict_file,
            "--n", "2", "--steps", "3", "--trials", "2", "--seed", "0",
            "--workers", "2",
        )
        assert code == 0 and json.loads(stdout)["passed"]


class TestSweepAndReport:
    def test_sweep_single_multiple(self, capsys, tmp_path):
        out = tmp_path / "sweep.csv"
        code, stdout, _ = run_cli(
            capsys, "certify", "sweep", "--kind", "gaussian",
            "--shape", "8x16", "--n-max", "3", "--trials", "4",
            "--seed", "0", "-o", str(out), "--multiples", "1",
        )
        assert code == 0
        assert json.loads(stdout)["written"] == [str(out)]
        lines = out.read_text().splitlines()
        assert lines[0] == "m,N,n,trials,success_fraction,mean_ratio,max_ratio"
        assert len(lines) == 5

    def test_sweep_multiple_files(self, capsys, tmp_path):
        out = tmp_path / "sweep.csv"
        code, stdout, _ = run_cli(
            capsys, "certify", "sweep", "--kind", "gaussian",
            "--shape", "8x16", "--n-max", "2", "--trials", "3",
            "--seed", "0", "-o", str(out), "--multiples", "1,2",
        )
        written = json.loads(stdout)["written"]
        assert code == 0 and len(written) == 2
        assert (tmp_path / "sweep_x1.csv").exists()
        assert (tmp_path / "sweep_x2.csv").exists()

    def test_report_renders_figures(self, capsys, tmp_path):
        out = tmp_path / "sweep.csv"
        run_cli(
            capsys, "certify", "sweep", "--kind", "gaussian",
            "--shape", "8x16", "--n-max", "2", "--trials", "3",
            "--seed", "0", "-o", str(out), "--multiples", "1",
        )
        code, stdout, _ = run_cli(
            capsys, "report", "--sweep", str(out), "--outdir", str(tmp_path / "figs")
        )
        assert code == 0
        figures = json.loads(stdout)["figures"]
        assert len(figures) == 2
        for fig in figures:
            from pathlib import Path

            assert Path(fig).stat().st_size > 0
            assert Path(f"{fig}.manifest.json").exists()


class TestDeterminism:
    def test_stdout_byte_identical(self, capsys, dict_file, target_file):
        commands = [
            ["dict", "coherence", dict_file],
            ["rip", "--dict", dict_file, "--exact", "3"],
            ["rip", "--dict", dict_file, "--sampled", "2", "--trials", "25", "--seed", "9"],
            ["run", "--algo", "omp", "--dict", dict_file, "--target", target_file,
             "--steps", "5"],
            ["run", "--algo", "pga", "--dict", dict_file, "--target", target_file,
             "--steps", "4"],
            ["oracle", "--dict", dict_file, "--target", target_file, "--n", "2"],
            ["certify", "tropp", "--dict", dict_file, "--n", "3", "--trials", "8",
             "--seed", "4"],
            ["certify", "lemma-decay", "--dict", dict_file, "--n", "2", "--steps", "3",
             "--trials", "3", "--seed", "2"],
        ]
        for cmd in commands:
            first = run_cli(capsys, *cmd)
            second = run_cli(capsys, *cmd)
            assert first[0] == second[0] == 0, cmd
            assert first[1] == second[1], cmd

    def test_generated_files_byte_identical(self, capsys, tmp_path):
        outs = []
        for name in ("a.bin", "b.bin"):
            out = tmp_path / name
            run_cli(
                capsys, "dict", "gen", "--kind", "gaussian",
                "--m", "9", "--n", "14", "--seed", "5", "-o", str(out),
            )
            outs.append(out.read_bytes())
        assert outs[0] == outs[1]

    def test_sweep_csv_byte_identical(self, capsys, tmp_path):
        texts = []
        for name in ("s1.csv", "s2.csv"):
            out = tmp_path / name
            run_cli(
                capsys, "certify", "sweep", "--kind", "gaussian",
                "--shape", "8x16", "--n-max", "2", "--trials", "4",
                "--seed", "3", "-o", str(out), "--multiples", "1",
            )
            texts.append(out.read_text())
        assert texts[0] == texts[1]


def test_version_flag(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0
    assert gl.__version__ in capsys.readouterr().out


def test_no_command_prints_help(capsys):
    assert main([]) == 2
