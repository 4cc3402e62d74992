import json
import subprocess
import sys

import numpy as np
import pytest

from dimwit import io
from dimwit.cli import main
from dimwit.core import table_to_json
from dimwit.games import Game, chsh_fixture
from dimwit.quantum import DensityMatrix, Povm, QuantumModel, bb84_ensemble, bb84_marginal, two_state_model

from conftest import GAMMA, h2


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def run_json(capsys, *argv):
    code, out, err = run(capsys, *argv, "--format", "json")
    return code, json.loads(out) if out.strip() else None, err


def write(tmp_path, name, doc):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return path


@pytest.fixture
def two_state_file(tmp_path, two_state):
    return write(tmp_path, "two_state.json", table_to_json(two_state))


class TestValidate:
    def test_two_state_file(self, capsys, two_state_file):
        code, doc, _ = run_json(capsys, "validate", two_state_file)
        assert code == 0

    def test_row_sum_violation(self, capsys, tmp_path):
        path = write(tmp_path, "bad.json", {"alphabet": [0, 1], "probs": [[[0.5, 0.4], [1.0, 0.0]]]})
        code, out, err = run(capsys, "validate", path)
        assert code == 2
        assert "RowSumViolation" in out + err

    def test_missing_file(self, capsys, tmp_path):
        code, _, err = run(capsys, "validate", tmp_path / "nope.json")
        assert code == 1

    def test_malformed_json(self, capsys, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text("{not json")
        assert run(capsys, "validate", path)[0] == 2


class TestBound:
    def test_two_state_search(self, capsys, two_state_file):
        code, doc, _ = run_json(capsys, "bound", two_state_file, "--method", "search")
        assert code == 0
        assert doc["exponent"] == pytest.approx(1.0, abs=1e-9)
        assert doc["dim_bound"] == 2
        assert set(doc["witness"]) >= {"T", "R", "g", "e", "c", "prior"}

    def test_chsh_fano(self, capsys):
        code, doc, _ = run_json(capsys, "bound", "--chsh", "--method", "fano", "--prior", "uniform")
        assert code == 0
        assert doc["exponent"] == pytest.approx(0.798, abs=1e-3)
        assert doc["dim_bound"] == 2

    @pytest.mark.parametrize("method", ["proto", "fano", "capacity", "search"])
    def test_chsh_methods_agree(self, capsys, method):
        code, doc, _ = run_json(capsys, "bound", "--chsh", "--method", method)
        assert code == 0
        assert doc["exponent"] == pytest.approx(2 * (1 - h2(GAMMA)), abs=1e-6)

    def test_single_preparation(self, capsys, tmp_path):
        path = write(tmp_path, "one.json", {"alphabet": [0, 1], "probs": [[[0.3, 0.7]], [[0.9, 0.1]]]})
        code, doc, _ = run_json(capsys, "bound", path, "--method", "search")
        assert code == 0
        assert doc["exponent"] == pytest.approx(0.0, abs=1e-12)
        assert doc["dim_bound"] == 1

    def test_strict_budget(self, capsys):
        code, doc, _ = run_json(capsys, "bound", "--chsh", "--method", "search",
                                "--max-enumeration", "5", "--strict")
        assert code == 3
        assert doc["converged"] is False

    def test_invalid_table(self, capsys, tmp_path):
        path = write(tmp_path, "neg.json", {"alphabet": [0, 1], "probs": [[[1.2, -0.2]]]})
        assert run(capsys, "bound", path)[0] == 2

    def test_byte_identical_json(self, capsys):
        argv = ("bound", "--chsh", "--method", "search", "--max-enumeration", "20", "--seed", "3",
                "--format", "json")
        _, first, _ = run(capsys, *argv)
        _, second, _ = run(capsys, *argv, "--threads", "1")
        _, third, _ = run(capsys, *argv)
        assert first == third
        assert first == second

    def test_text_output_shows_exponent_and_dimension(self, capsys):
        code, out, _ = run(capsys, "bound", "--two-state", "--method", "search")
        assert code == 0
        assert "exponent:  1.000000" in out
        assert "dimension: >= 2" in out


def toy_three_answer_game():
    bits = (0, 1)
    return Game.from_predicate(bits, bits, (0, 1, 2), bits, np.full((2, 2), 0.25),
                               lambda a, b, s, t: (a == 0) == (b == 0))


class TestGame:
    def test_builtin_chsh(self, capsys):
        code, doc, _ = run_json(capsys, "game", "--chsh")
        assert code == 0
        assert doc["exponent"] == pytest.approx(0.798, abs=1e-3)
        assert doc["dim_bound"] == 2

    def test_chance_success(self, capsys):
        code, doc, _ = run_json(capsys, "game", "--chsh", "--success", "0.5")
        assert code == 0
        assert doc["exponent"] == pytest.approx(0.0, abs=1e-12)

    def test_files(self, capsys, tmp_path):
        game, stats, _ = chsh_fixture()
        g = write(tmp_path, "game.json", game.to_json())
        s = write(tmp_path, "stats.json", stats.to_json())
        code, doc, _ = run_json(capsys, "game", g, s)
        assert code == 0
        assert doc["exponent"] == pytest.approx(2 * (1 - h2(GAMMA)), abs=1e-12)

    def test_non_unique_needs_merge(self, capsys, tmp_path):
        g = write(tmp_path, "toy.json", toy_three_answer_game().to_json())
        s = write(tmp_path, "stats.json", {"bob_marginals": [[0.5, 0.5]] * 2, "alice_success": [0.9, 0.9]})
        code, out, err = run(capsys, "game", g, s)
        assert code == 2
        assert "NotUnique" in err
        code, doc, _ = run_json(capsys, "game", g, s, "--merge")
        assert code == 0
        assert doc["dim_bound"] >= 1


class TestCapacity:
    def test_bsc(self, capsys, tmp_path):
        path = write(tmp_path, "bsc.json", {"matrix": [[GAMMA, 1 - GAMMA], [1 - GAMMA, GAMMA]]})
        code, doc, _ = run_json(capsys, "capacity", path)
        assert code == 0
        assert doc["capacity"] == pytest.approx(1 - h2(GAMMA), abs=1e-6)


class TestVerify:
    def test_two_state_builtin(self, capsys):
        assert run(capsys, "verify", "--two-state", "--tol", "1e-12")[0] == 0

    def test_bb84_builtin(self, capsys):
        assert run(capsys, "verify", "--bb84")[0] == 0

    def test_files(self, capsys, tmp_path, two_state):
        m = write(tmp_path, "model.json", io.model_to_json(two_state_model()))
        t = write(tmp_path, "table.json", table_to_json(two_state))
        assert run(capsys, "verify", m, t, "--tol", "1e-12")[0] == 0

    def test_perturbed_model(self, capsys, tmp_path, two_state):
        P0, P1 = np.diag([1.0, 0.0]), np.diag([0.0, 1.0])
        wrong = QuantumModel((DensityMatrix(P0), DensityMatrix(P1)),
                             (Povm((P0, P1)), Povm((P0 + 0.4 * P1, 0.6 * P1))))
        m = write(tmp_path, "model.json", io.model_to_json(wrong))
        t = write(tmp_path, "table.json", table_to_json(two_state))
        code, out, _ = run(capsys, "verify", m, t)
        assert code == 2
        assert "deviation" in out

    def test_dimension_mismatch(self, capsys, tmp_path, chsh):
        m = write(tmp_path, "model.json", io.model_to_json(two_state_model()))
        t = write(tmp_path, "table.json", table_to_json(chsh))
        code, _, err = run(capsys, "verify", m, t)
        assert code == 2
        assert "Mismatch" in err


class TestMinEntropy:
    def test_bb84_file(self, capsys, tmp_path):
        path = write(tmp_path, "bb84.json", io.ensemble_to_json(bb84_ensemble()))
        code, doc, _ = run_json(capsys, "minentropy", path)
        assert code == 0
        assert doc["p_guess"] == pytest.approx(0.5, abs=1e-6)
        assert doc["min_entropy"] == pytest.approx(1.0, abs=1e-5)

    def test_marginal_file(self, capsys, tmp_path):
        path = write(tmp_path, "marg.json", io.ensemble_to_json(bb84_marginal()))
        code, doc, _ = run_json(capsys, "minentropy", path)
        assert code == 0
        assert doc["p_guess"] == pytest.approx(0.8535534, abs=1e-6)

    def test_epsilon_too_large(self, capsys):
        code, _, err = run(capsys, "minentropy", "--bb84", "--epsilon", "0.6")
        assert code == 2
        assert "EpsilonTooLarge" in err


class TestCounterexample:
    def test_default(self, capsys):
        code, doc, _ = run_json(capsys, "counterexample")
        assert code == 0
        assert doc["additivity"]["violated"] is True
        assert doc["additivity"]["hypothetical_bound"] == pytest.approx(1.543, abs=1e-3)
        assert doc["splitting"]["holds"] is False

    def test_independent(self, capsys):
        code, doc, _ = run_json(capsys, "counterexample", "--independent")
        assert code == 0
        assert doc["additivity_holds"] is True

    def test_large_epsilon_inconclusive(self, capsys):
        code, out, _ = run(capsys, "counterexample", "--epsilon", "0.4")
        assert code == 4
        assert "inconclusive" in out


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "dimwit", "game", "--chsh", "--format", "json"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["dim_bound"] == 2
