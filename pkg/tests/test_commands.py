import os

import numpy as np
import pandas as pd
import pytest

from app.dto.dtos import ExperimentConfig
from app.errors import ConfigError, NumericalError
from app.globals import TRACE_HEADER
from app.models import executar_graficos
from app.process.file_operations import carregar_checkpoint, carregar_trace, salvar_checkpoint
from app.process.game_env import FEATURE_DIM
from app.process.lstm_qnet import LstmQNet
from app.process.q_learning import QLearner

RAPIDO = [
    "--episodes", "2", "--steps", "30",
    "--set", "window=5", "--set", "hidden_dim=4",
    "--set", "weight_resolution=2", "--set", "attack_levels=3",
]


def _ler(caminho, modo="r"):
    with open(caminho, modo) as arquivo:
        return arquivo.read()


def _resumo(caminho):
    linhas = _ler(caminho).splitlines()
    return dict(linha.split("=", 1) for linha in linhas)


def _treinar(runner, out, *extra):
    resultado = runner.invoke(args=["train", "--out", str(out), *RAPIDO, *extra])
    assert resultado.exit_code == 0, resultado.output
    return resultado


def _checkpoint_zerado(out, **valores):
    cfg = ExperimentConfig(out=str(out), **valores)
    grade = cfg.action_grid()
    rng = np.random.default_rng(0)
    learners = {
        nome: QLearner(acoes, LstmQNet.zeros(FEATURE_DIM, cfg["hidden_dim"], len(acoes)), cfg.train_config(), rng)
        for nome, acoes in (("av", grade.av_actions), ("att", grade.att_actions))
    }
    os.makedirs(out, exist_ok=True)
    return salvar_checkpoint(os.path.join(out, "checkpoint.npz"), learners, cfg.grid_hash(), cfg.to_dict())


def test_train_writes_all_artifacts(runner, tmp_path):
    resultado = _treinar(runner, tmp_path / "run")
    for nome in ("trace.csv", "history.csv", "summary.txt", "config.lock", "checkpoint.npz"):
        assert (tmp_path / "run" / nome).is_file()
    assert "command=train" in resultado.output
    resumo = _resumo(tmp_path / "run" / "summary.txt")
    assert resumo["episodes_run"] == "2" and resumo["steps"] == "60"
    assert resumo["scenario"] == "beacon_only"
    trace = carregar_trace(tmp_path / "run" / "trace.csv")
    assert len(trace) == 60
    np.testing.assert_allclose(trace[["w1", "w2", "w3", "w4"]].sum(axis=1), 1.0)
    assert not trace[["a1", "a2", "a4"]].to_numpy().any()


def test_trace_header_is_stable(runner, tmp_path):
    _treinar(runner, tmp_path / "run")
    primeira = _ler(tmp_path / "run" / "trace.csv").split("\n", 1)[0]
    assert primeira == TRACE_HEADER
    assert primeira == "step,episode,w1,w2,w3,w4,a1,a2,a3,a4,delta,spacing_m,spacing_dev_m,regret,eps_explore"


def test_train_is_byte_deterministic(runner, tmp_path):
    _treinar(runner, tmp_path / "a", "--seed", "7")
    _treinar(runner, tmp_path / "b", "--seed", "7")
    for nome in ("trace.csv", "history.csv"):
        assert _ler(tmp_path / "a" / nome, "rb") == _ler(tmp_path / "b" / nome, "rb")
    lock_a, lock_b = _resumo(tmp_path / "a" / "config.lock"), _resumo(tmp_path / "b" / "config.lock")
    assert lock_a.pop("out") != lock_b.pop("out")
    assert lock_a == lock_b
    resumo_a, resumo_b = _resumo(tmp_path / "a" / "summary.txt"), _resumo(tmp_path / "b" / "summary.txt")
    resumo_a.pop("wall_time_s"), resumo_b.pop("wall_time_s")
    assert resumo_a == resumo_b
    _treinar(runner, tmp_path / "c", "--seed", "8")
    assert _ler(tmp_path / "a" / "trace.csv", "rb") != _ler(tmp_path / "c" / "trace.csv", "rb")


def test_config_lock_echoes_resolved_config(runner, tmp_path):
    _treinar(runner, tmp_path / "run", "--scenario", "beacon")
    lock = _resumo(tmp_path / "run" / "config.lock")
    assert lock["scenario"] == "beacon_only"
    assert lock["window"] == "5" and lock["episodes"] == "2"
    assert lock["frozen_target"] == "false"
    assert len(lock["grid_hash"]) == 64


def test_checkpoint_round_trip(runner, tmp_path):
    _treinar(runner, tmp_path / "run")
    checkpoint = carregar_checkpoint(tmp_path / "run" / "checkpoint.npz")
    assert checkpoint["meta"]["players"] == ["av", "att"]
    assert checkpoint["nets"]["av"].n_actions == 10
    assert checkpoint["nets"]["att"].n_actions == 3
    assert checkpoint["meta"]["config"]["hidden_dim"] == 4


def test_eval_of_zero_checkpoint_always_picks_first_action(runner, tmp_path):
    checkpoint = _checkpoint_zerado(tmp_path / "ck", window=5, hidden_dim=4, steps_per_episode=15, episodes=2)
    resultado = runner.invoke(args=["eval", "--checkpoint", checkpoint])
    assert resultado.exit_code == 0, resultado.output
    trace = carregar_trace(tmp_path / "ck" / "eval" / "trace.csv")
    assert len(trace) == 30
    assert (trace[["w1", "w2", "w3", "w4"]] == [0.0, 0.0, 0.0, 1.0]).all().all()
    assert (trace[["a1", "a2", "a3", "a4"]] == [0.0, 0.0, -1.0, 0.0]).all().all()
    assert (trace["eps_explore"] == 0.0).all()


def test_eval_rejects_incompatible_grid(runner, tmp_path):
    checkpoint = _checkpoint_zerado(tmp_path / "ck", window=5, hidden_dim=4)
    resultado = runner.invoke(args=["eval", "--checkpoint", checkpoint, "--set", "hidden_dim=8"])
    assert resultado.exit_code == 2
    assert "error[config]" in resultado.output


def test_eval_of_unreadable_checkpoint_is_config_error(runner, tmp_path):
    lixo = tmp_path / "lixo.npz"
    lixo.write_bytes(b"isto nao e um arquivo npz\n")
    resultado = runner.invoke(args=["eval", "--checkpoint", str(lixo), "--out", str(tmp_path / "e")])
    assert resultado.exit_code == 2
    assert "error[config]" in resultado.output


def test_checkpoint_missing_arrays_is_config_error(tmp_path):
    incompleto = tmp_path / "incompleto.npz"
    np.savez(incompleto, outra=np.zeros(3))
    with pytest.raises(ConfigError):
        carregar_checkpoint(incompleto)


def test_eval_is_deterministic_after_training(runner, tmp_path):
    _treinar(runner, tmp_path / "run")
    checkpoint = str(tmp_path / "run" / "checkpoint.npz")
    for destino in ("e1", "e2"):
        resultado = runner.invoke(args=["eval", "--checkpoint", checkpoint, "--out", str(tmp_path / destino)])
        assert resultado.exit_code == 0, resultado.output
    assert _ler(tmp_path / "e1" / "trace.csv", "rb") == _ler(tmp_path / "e2" / "trace.csv", "rb")


def test_baseline_trace_schema_matches_train(runner, tmp_path):
    _treinar(runner, tmp_path / "train")
    resultado = runner.invoke(args=["baseline", "--out", str(tmp_path / "base"), *RAPIDO])
    assert resultado.exit_code == 0, resultado.output
    cabecalho = _ler(tmp_path / "base" / "trace.csv").split("\n", 1)[0]
    assert cabecalho == _ler(tmp_path / "train" / "trace.csv").split("\n", 1)[0]
    trace = carregar_trace(tmp_path / "base" / "trace.csv")
    assert trace[["w1", "w2", "w3", "w4"]].nunique().max() == 1
    assert "mean_abs_spacing_dev_final" in _resumo(tmp_path / "base" / "summary.txt")


def test_baseline_against_trained_attacker(runner, tmp_path):
    _treinar(runner, tmp_path / "train")
    checkpoint = str(tmp_path / "train" / "checkpoint.npz")
    resultado = runner.invoke(args=["baseline", "--out", str(tmp_path / "base"), *RAPIDO,
                                    "--set", f"baseline_attacker={checkpoint}"])
    assert resultado.exit_code == 0, resultado.output
    assert "política treinada" in resultado.output


def test_oracle_matching_pennies(runner, tmp_path):
    resultado = runner.invoke(args=["oracle", "--matching-pennies", "--exact", "--out", str(tmp_path)])
    assert resultado.exit_code == 0, resultado.output
    estrategias = pd.read_csv(tmp_path / "strategies.csv")
    np.testing.assert_allclose(estrategias["fp_prob"], 0.5, atol=0.02)
    np.testing.assert_allclose(estrategias["exact_prob"], 0.5, atol=1e-12)
    relatorio = _resumo(tmp_path / "oracle.txt")
    assert abs(float(relatorio["value_fp"])) <= 0.02
    assert (tmp_path / "payoff.csv").is_file() and (tmp_path / "fp_log.csv").is_file()


def test_oracle_exact_rejects_oversize_grid(runner, tmp_path):
    resultado = runner.invoke(args=["oracle", "--exact", "--out", str(tmp_path)])
    assert resultado.exit_code == 2
    assert "error[contract]" in resultado.output


def test_oracle_reduced_grid_fp_matches_exact(runner, tmp_path):
    resultado = runner.invoke(args=[
        "oracle", "--exact", "--scenario", "beacon", "--out", str(tmp_path),
        "--set", "weight_resolution=1", "--set", "attack_levels=2",
    ])
    assert resultado.exit_code == 0, resultado.output
    relatorio = _resumo(tmp_path / "oracle.txt")
    assert float(relatorio["value_exact"]) == pytest.approx(0.04)
    assert float(relatorio["value_fp"]) == pytest.approx(float(relatorio["value_exact"]), abs=1e-2)
    log = pd.read_csv(tmp_path / "fp_log.csv")
    assert log["exploitability"].iloc[-1] <= log["exploitability"].iloc[0]
    payoff = pd.read_csv(tmp_path / "payoff.csv", index_col=0)
    assert payoff.shape == (4, 2)


@pytest.mark.parametrize("extra", [["--set", "foo=1"], ["--set", "lambda=-1"], ["--set", "gamma=abc"],
                                   ["--set", "sem_igual"], ["--set", "window=-2"]])
def test_invalid_config_exits_with_code_2(runner, tmp_path, extra):
    resultado = runner.invoke(args=["train", "--out", str(tmp_path), *extra])
    assert resultado.exit_code == 2
    assert "error[config]" in resultado.output


def test_missing_config_file_exits_with_code_3(runner, tmp_path):
    resultado = runner.invoke(args=["train", "--config", str(tmp_path / "nao_existe.cfg")])
    assert resultado.exit_code == 3
    assert "error[io]" in resultado.output


def test_unwritable_output_exits_with_code_3(runner, tmp_path):
    arquivo = tmp_path / "arquivo"
    arquivo.write_text("x")
    resultado = runner.invoke(args=["train", "--out", str(arquivo / "run"), *RAPIDO])
    assert resultado.exit_code == 3
    assert "error[io]" in resultado.output


def test_numerical_failure_exits_with_code_4(runner, tmp_path, monkeypatch):
    def falhar(cfg, log=print):
        raise NumericalError("parâmetros não finitos")

    monkeypatch.setattr("app.commands.experiment_commands.executar_treino", falhar)
    resultado = runner.invoke(args=["train", "--out", str(tmp_path)])
    assert resultado.exit_code == 4
    assert "error[numerical]: parâmetros não finitos" in resultado.output


def test_config_file_and_flag_precedence(runner, tmp_path):
    arquivo = tmp_path / "exp.cfg"
    arquivo.write_text(
        "# experimento reduzido\n"
        "scenario=all\nseed=9\nepisodes=1\nsteps_per_episode=10\n"
        "window=4\nhidden_dim=3\nweight_resolution=1\nattack_levels=2\n"
    )
    resultado = runner.invoke(args=["train", "--config", str(arquivo), "--seed", "4",
                                    "--set", "episodes=2", "--out", str(tmp_path / "run")])
    assert resultado.exit_code == 0, resultado.output
    lock = _resumo(tmp_path / "run" / "config.lock")
    assert lock["scenario"] == "all" and lock["seed"] == "4" and lock["episodes"] == "2"
    assert lock["steps_per_episode"] == "10"


def test_config_file_key_without_value_is_rejected(runner, tmp_path):
    arquivo = tmp_path / "exp.cfg"
    arquivo.write_text("seed\n")
    resultado = runner.invoke(args=["train", "--config", str(arquivo), "--out", str(tmp_path / "run")])
    assert resultado.exit_code == 2


def test_config_file_does_not_expand_variables(runner, tmp_path, monkeypatch):
    monkeypatch.setenv("SEMENTE_EXTERNA", "5")
    arquivo = tmp_path / "exp.cfg"
    arquivo.write_text("seed=${SEMENTE_EXTERNA}\n")
    resultado = runner.invoke(args=["train", "--config", str(arquivo), "--out", str(tmp_path / "run"), *RAPIDO])
    assert resultado.exit_code == 2
    assert "error[config]" in resultado.output
    assert not (tmp_path / "run" / "config.lock").exists()


def test_plot_single_trace(runner, tmp_path):
    _treinar(runner, tmp_path / "run")
    resultado = runner.invoke(args=["plot", str(tmp_path / "run" / "trace.csv"), "--out", str(tmp_path / "g")])
    assert resultado.exit_code == 0, resultado.output
    for nome in ("actions.svg", "regret.svg", "spacing_dev.svg"):
        assert (tmp_path / "g" / nome).is_file()
        assert _ler(tmp_path / "g" / nome).lstrip().startswith("<?xml")


def test_plot_two_traces_emits_one_overlay_per_metric(runner, tmp_path):
    _treinar(runner, tmp_path / "train")
    runner.invoke(args=["baseline", "--out", str(tmp_path / "base"), *RAPIDO])
    resultado = runner.invoke(args=["plot", str(tmp_path / "train" / "trace.csv"),
                                    str(tmp_path / "base" / "trace.csv"), "--out", str(tmp_path / "g")])
    assert resultado.exit_code == 0, resultado.output
    assert sorted(os.listdir(tmp_path / "g")) == ["compare_delta.svg", "compare_regret.svg",
                                                  "compare_spacing_dev_m.svg"]


def test_plot_empty_trace_succeeds(runner, tmp_path):
    vazio = tmp_path / "vazio.csv"
    vazio.write_text(TRACE_HEADER + "\n")
    resultado = runner.invoke(args=["plot", str(vazio), "--out", str(tmp_path / "g")])
    assert resultado.exit_code == 0, resultado.output
    assert (tmp_path / "g" / "regret.svg").is_file()


def test_plot_malformed_trace_reports_line(runner, tmp_path):
    linha_ok = "1,0,0,0,1,0,0,0,1,0,1.0,32.0,0.01,0.0001,1.0"
    ruim = tmp_path / "ruim.csv"
    ruim.write_text(f"{TRACE_HEADER}\n{linha_ok}\n2,0,0,0,1,0,0,0,abc,0,1.0,32.0,0.01,0.0001,1.0\n")
    resultado = runner.invoke(args=["plot", str(ruim), "--out", str(tmp_path / "g")])
    assert resultado.exit_code == 2
    assert "error[trace]: linha 3" in resultado.output

    cabecalho = tmp_path / "cabecalho.csv"
    cabecalho.write_text("step,episode\n1,0\n")
    resultado = runner.invoke(args=["plot", str(cabecalho), "--out", str(tmp_path / "g")])
    assert resultado.exit_code == 2
    assert "linha 1" in resultado.output


def test_plot_trace_with_invalid_utf8_reports_line(runner, tmp_path):
    linha_ok = "1,0,0,0,1,0,0,0,1,0,1.0,32.0,0.01,0.0001,1.0"
    ruim = tmp_path / "binario.csv"
    ruim.write_bytes(f"{TRACE_HEADER}\n{linha_ok}\n".encode() + b"\xff\xfe,0\n")
    resultado = runner.invoke(args=["plot", str(ruim), "--out", str(tmp_path / "g")])
    assert resultado.exit_code == 2
    assert "error[trace]: linha 3" in resultado.output


def test_plot_data_points_equal_trace_rows(runner, tmp_path, silencioso):
    _treinar(runner, tmp_path / "run")
    caminho = str(tmp_path / "run" / "trace.csv")
    dados = executar_graficos([caminho], str(tmp_path / "g"), log=silencioso)
    linhas = len(carregar_trace(caminho))
    for grafico in dados:
        assert len(grafico["dados"]["passos"]) == linhas
        assert all(len(serie["valores"]) == linhas for serie in grafico["dados"]["series"])
