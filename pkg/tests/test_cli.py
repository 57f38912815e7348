import json
import subprocess
import sys

import numpy as np
import pytest

import fdivbounds
from fdivbounds.cli import COMMAND_OPERATIONS, main


@pytest.fixture
def files(tmp_path):
    paths = {}
    paths["p"] = tmp_path / "p.json"
    paths["p"].write_text(json.dumps({"pmf": [0.5, 0.5]}))
    paths["q"] = tmp_path / "q.json"
    paths["q"].write_text(json.dumps({"pmf": [0.25, 0.75]}))
    paths["ens"] = tmp_path / "ens.json"
    paths["ens"].write_text(
        json.dumps({"members": [{"pmf": [0.75, 0.25]}, {"pmf": [0.25, 0.75]}]})
    )
    paths["cover"] = tmp_path / "cover.json"
    paths["cover"].write_text(json.dumps({"candidates": [{"pmf": [0.5, 0.5]}]}))
    paths["profile"] = tmp_path / "profile.json"
    paths["profile"].write_text(
        json.dumps(
            {
                "packing": [[0.01, 1000.0], [1.0, 10.0]],
                "covering": [[0.1, 4.0], [1.0, 2.0]],
                "kind": "chi2",
            }
        )
    )
    return paths


def run_cli(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, out


class TestSubcommands:
    def test_divergence(self, files, capsys):
        code, out = run_cli(
            capsys, "divergence", "--gen", "chi2", str(files["p"]), str(files["q"])
        )
        assert code == 0
        assert json.loads(out)["value"] == pytest.approx(1.0 / 3.0, abs=1e-12)

    def test_bayes_risk(self, files, capsys):
        code, out = run_cli(capsys, "bayes-risk", str(files["ens"]))
        assert code == 0
        payload = json.loads(out)
        assert payload["bayes_risk"] == pytest.approx(0.25)
        assert payload["map_test"] == [0, 1]

    def test_bayes_risk_with_prior_override(self, files, capsys):
        code, out = run_cli(
            capsys, "bayes-risk", str(files["ens"]), "--prior", "1.0,0.0"
        )
        assert code == 0
        assert json.loads(out)["bayes_risk"] == pytest.approx(0.0)

    def test_minimax_risk(self, files, capsys):
        code, out = run_cli(capsys, "minimax-risk", str(files["ens"]), "--tol", "1e-6")
        assert code == 0
        payload = json.loads(out)
        assert payload["value"] == pytest.approx(0.25, abs=1e-9)
        assert payload["duality_gap"] <= 1e-9

    def test_bound_from_stats(self, files, capsys):
        code, out = run_cli(
            capsys, "bound", "--family", "fano", "--stats", "N=16,avgKL=1"
        )
        assert code == 0
        assert json.loads(out)["lower_bound"] == pytest.approx(0.3893, abs=1e-4)

    def test_bound_from_ensemble(self, files, capsys):
        code, out = run_cli(
            capsys, "bound", "--family", "chi2", "--from-ensemble", str(files["ens"])
        )
        assert code == 0
        payload = json.loads(out)
        assert 0.0 <= payload["lower_bound"] <= 0.25 + 1e-9

    def test_bound_needs_exactly_one_source(self, files, capsys):
        code, _ = run_cli(capsys, "bound", "--family", "fano")
        assert code == 1

    def test_bound_generic_families(self, capsys):
        code, out = run_cli(
            capsys, "bound", "--family", "implicit", "--gen", "chi2",
            "--stats", "N=2,sum=0.5",
        )
        assert code == 0
        assert json.loads(out)["lower_bound"] == pytest.approx(0.25, abs=1e-9)
        code, out = run_cli(
            capsys, "bound", "--family", "tangent", "--gen", "chi2",
            "--stats", "N=2,sum=0.5,a=0.25",
        )
        assert code == 0
        assert json.loads(out)["lower_bound"] == pytest.approx(0.25, abs=1e-12)
        code, out = run_cli(
            capsys, "bound", "--family", "two_point", "--gen", "chi2",
            "--stats", "V=0.3",
        )
        assert code == 0
        assert json.loads(out)["achieved"] == pytest.approx(0.18, abs=1e-12)
        code, out = run_cli(
            capsys, "bound", "--family", "floor", "--gen", "kl",
            "--stats", "W=0.5,rbar=0.0",
        )
        assert code == 0
        assert json.loads(out)["value"] == pytest.approx(np.log(2.0), abs=1e-12)

    def test_divergence_analytic_model(self, capsys):
        code, out = run_cli(
            capsys, "divergence", "--model", "gaussian_location",
            "--theta0", "1", "--theta1", "0", "--n", "2",
        )
        assert code == 0
        payload = json.loads(out)
        assert payload["kl"] == pytest.approx(1.0)
        assert payload["chi2"] == pytest.approx(np.e**2 - 1.0)

    def test_entropy_schedule(self, capsys):
        code, out = run_cli(
            capsys, "entropy-bound", "--kind", "chi2", "--model",
            "support_function", "--schedule-n", "100",
            "--params", "d=2,c_prime=1,c_dprime=1,gamma=1,sigma=1",
        )
        assert code == 0
        payload = json.loads(out)
        assert payload["c"] == pytest.approx(0.0625)
        assert np.log1p(payload["eps"] ** 2) == pytest.approx(payload["u"] ** 2)

    def test_jf_closed_and_numeric(self, files, capsys):
        code, out = run_cli(
            capsys, "jf", str(files["ens"]), "--gen", "chi2", "--method", "closed"
        )
        assert code == 0
        closed = json.loads(out)
        code, out = run_cli(
            capsys, "jf", str(files["ens"]), "--gen", "chi2", "--method", "numeric"
        )
        numeric = json.loads(out)
        assert closed["value"] == pytest.approx(numeric["value"], abs=1e-6)
        assert "upper_chain" in closed

    def test_jf_cover(self, files, capsys):
        code, out = run_cli(
            capsys,
            "jf-cover",
            str(files["ens"]),
            "--gen",
            "chi2",
            "--candidates",
            str(files["cover"]),
            "--kind",
            "chi2",
        )
        assert code == 0
        payload = json.loads(out)
        assert payload["specialized_bound"] >= payload["generic_bound"] - 1e-12

    def test_entropy_bound_builtin_model(self, capsys):
        code, out = run_cli(
            capsys,
            "entropy-bound",
            "--kind",
            "chi2",
            "--model",
            "gaussian_ball",
            "--params",
            "gamma=10,sigma=1,d=2",
            "--eta-grid",
            "logspace:0.001:10:64",
            "--eps-grid",
            "1.3108324944320957",
        )
        assert code == 0
        payload = json.loads(out)
        assert payload["lower_bound"] > 0

    def test_entropy_bound_custom_profile_csv(self, files, capsys):
        code, out = run_cli(
            capsys,
            "entropy-bound",
            "--kind",
            "chi2",
            "--model",
            "custom",
            "--profile",
            str(files["profile"]),
            "--eta-grid",
            "0.02,0.1",
            "--eps-grid",
            "0.2,0.5",
            "--format",
            "csv",
        )
        assert code == 0
        lines = out.strip().splitlines()
        assert lines[0] == "eta,eps,bound"
        assert len(lines) == 5

    def test_vg(self, capsys):
        code, out = run_cli(capsys, "vg", "--k", "16", "--seed", "7")
        assert code == 0
        payload = json.loads(out)
        assert payload["size"] >= payload["size_floor"]
        assert payload["min_distance"] >= 4
        assert all(len(w) == 16 for w in payload["words"])

    def test_covmat_bound(self, capsys):
        code, out = run_cli(
            capsys, "covmat-bound", "--n", "64", "--alpha", "1", "--seed", "0"
        )
        assert code == 0
        payload = json.loads(out)
        assert payload["lower_bound"] > 0

    def test_cap_packing_json(self, capsys):
        code, out = run_cli(
            capsys, "cap-packing", "--d", "2", "--p", "1", "--eps", "0.01"
        )
        assert code == 0
        payload = json.loads(out)
        assert payload["n_caps"] == 22

    def test_cap_packing_csv_sweep(self, capsys):
        code, out = run_cli(
            capsys, "cap-packing", "--d", "2", "--p", "1", "--eps", "0.01,0.02",
            "--format", "csv",
        )
        assert code == 0
        lines = out.strip().splitlines()
        assert len(lines) == 3
        assert lines[0].startswith("epsilon,")

    def test_verify_single_suite(self, capsys):
        code, out = run_cli(capsys, "verify", "--suite", "core", "--seed", "0")
        assert code == 0
        payload = json.loads(out)
        assert payload["pass"] is True

    def test_usage_error_exit_code(self):
        with pytest.raises(SystemExit) as err:
            main(["divergence", "--gen"])
        assert err.value.code == 2

    def test_computation_error_exit_code(self, files, capsys, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps({"pmf": [0.5, 0.6]}))
        code, _ = run_cli(capsys, "bayes-risk", str(bad))
        assert code == 1


class TestDeterminism:
    def test_repeated_runs_byte_identical(self, files):
        cmd = [
            sys.executable,
            "-m",
            "fdivbounds.cli",
            "vg",
            "--k",
            "24",
            "--seed",
            "3",
        ]
        first = subprocess.run(cmd, capture_output=True, check=True).stdout
        second = subprocess.run(cmd, capture_output=True, check=True).stdout
        assert first == second

    def test_seed_env_override(self, files):
        cmd = [sys.executable, "-m", "fdivbounds.cli", "vg", "--k", "16"]
        env_a = {"FDIVBOUNDS_SEED": "3"}
        import os

        env = dict(os.environ)
        out_default = subprocess.run(cmd, capture_output=True, check=True, env=env).stdout
        env.update(env_a)
        out_seeded = subprocess.run(cmd, capture_output=True, check=True, env=env).stdout
        assert out_default != out_seeded


class TestDispatchCoverage:
    def test_every_operation_reachable_exactly_once(self):
        """Each public library operation belongs to exactly one subcommand."""
        seen = {}
        for cmd, ops in COMMAND_OPERATIONS.items():
            for op in ops:
                assert op not in seen, f"{op} mapped to {seen[op]} and {cmd}"
                seen[op] = cmd
        public_ops = {
            name
            for name in fdivbounds.__all__
            if name[0].islower() and name not in ("default_generators",)
        }
        # operations named in the dispatch table but living outside __all__
        # (suite runner, ensemble-statistics variant) are checked by name
        table = set(seen)
        missing = public_ops - table
        assert not missing, f"operations not reachable from the CLI: {sorted(missing)}"

    def test_table_matches_parser(self):
        from fdivbounds.cli import build_parser

        parser = build_parser()
        subparsers = next(
            a for a in parser._actions if isinstance(a, type(parser._actions[-1]))
        )
        # the argparse internals hold the registered choices
        choices = None
        for action in parser._actions:
            if hasattr(action, "choices") and action.choices:
                choices = set(action.choices)
                break
        assert choices == set(COMMAND_OPERATIONS)
