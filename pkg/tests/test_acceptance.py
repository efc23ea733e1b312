import numpy as np
import pytest

from app.process.baselines import noise_floor
from app.process.file_operations import carregar_trace
from app.process.sensing_fusion import NoiseModel, inverse_variance_weights
from app.process.vehicle_dynamics import FollowConfig

pytestmark = pytest.mark.slow


def _resumo(caminho):
    with open(caminho) as arquivo:
        return dict(linha.split("=", 1) for linha in arquivo.read().splitlines())


def _invocar(runner, *args):
    resultado = runner.invoke(args=[str(a) for a in args])
    assert resultado.exit_code == 0, resultado.output
    return resultado


def _inclinacao(valores):
    return np.polyfit(np.arange(len(valores)), valores, 1)[0]


def test_beacon_attack_shifts_weight_away_and_regret_decays(runner, tmp_path):
    _invocar(runner, "train", "--scenario", "beacon", "--seed", 0, "--out", tmp_path / "beacon")
    _invocar(runner, "train", "--scenario", "none", "--seed", 0, "--out", tmp_path / "none")
    atacado = _resumo(tmp_path / "beacon" / "summary.txt")
    livre = _resumo(tmp_path / "none" / "summary.txt")

    w3_atacado = float(atacado["mean_w3_final"])
    assert w3_atacado < inverse_variance_weights(NoiseModel())[2]
    assert w3_atacado < float(livre["mean_w3_final"])
    assert float(atacado["mean_regret_final"]) <= 0.25 * float(atacado["mean_regret_first"])


def test_all_sensor_attack_deviation_plateaus(runner, tmp_path):
    _invocar(
        runner, "train", "--scenario", "all", "--seed", 0, "--episodes", 1000, "--steps", 100,
        "--set", "weight_resolution=1", "--set", "attack_levels=2", "--set", "window=5",
        "--set", "hidden_dim=8", "--set", "engage_delay=0", "--set", "eps_decay=0.99",
        "--set", "plateau_patience=100000", "--out", tmp_path / "run",
    )
    desvio = carregar_trace(tmp_path / "run" / "trace.csv")["spacing_dev_m"].to_numpy()
    assert len(desvio) == 100_000
    metade = len(desvio) // 2
    inicial, final = _inclinacao(desvio[:metade]), _inclinacao(desvio[metade:])
    assert inicial > 0.0
    assert abs(final) <= 0.1 * inicial
    assert desvio[metade:].mean() > desvio[:metade // 10].mean()


def test_no_attack_training_reaches_noise_floor(runner, tmp_path):
    _invocar(
        runner, "train", "--scenario", "none", "--seed", 0, "--episodes", 10_000, "--steps", 2,
        "--set", "weight_resolution=1", "--set", "engage_delay=0", "--set", "eps_end=0",
        "--set", "eps_decay=0.999", "--set", "window=5", "--set", "hidden_dim=8",
        "--set", "plateau_patience=100000", "--out", tmp_path / "run",
    )
    resumo = _resumo(tmp_path / "run" / "summary.txt")
    ruido = NoiseModel()
    piso = noise_floor(FollowConfig(), inverse_variance_weights(ruido), ruido, 2, engage_delay=0)
    assert float(resumo["mean_regret_final"]) == pytest.approx(piso, rel=0.2)
    assert float(resumo["mean_w3_final"]) == pytest.approx(1.0, abs=0.01)


def test_trained_av_beats_static_weights_against_trained_attacker(runner, tmp_path):
    vitorias = 0
    for seed in range(5):
        run = tmp_path / f"seed{seed}"
        reduzido = ["--scenario", "beacon", "--seed", seed, "--episodes", 10, "--steps", 500]
        _invocar(runner, "train", *reduzido, "--out", run / "train")
        checkpoint = run / "train" / "checkpoint.npz"
        _invocar(runner, "eval", "--checkpoint", checkpoint, "--episodes", 2, "--out", run / "eval")
        _invocar(runner, "baseline", *reduzido, "--episodes", 2, "--out", run / "base",
                 "--set", f"baseline_attacker={checkpoint}")
        treinado = float(_resumo(run / "eval" / "summary.txt")["mean_abs_spacing_dev_final"])
        estatico = float(_resumo(run / "base" / "summary.txt")["mean_abs_spacing_dev_final"])
        vitorias += treinado < estatico
    assert vitorias >= 4
