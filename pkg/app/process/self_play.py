import numpy as np
import pandas as pd

from app.globals import TRACE_COLUMNS, stop_event
from app.process.q_learning import Experience

HISTORY_COLUMNS = ["episode", "mean_regret", "mean_abs_delta", "eps_explore", "steps", "collision"]


def exploration_rate(episode, cfg):
    """Taxa ε de exploração no episódio (decaimento exponencial de eps_start até eps_end)."""
    return cfg.exploration_rate(episode)


def plateau_reached(mean_regrets, cfg):
    """
    Critério de parada: a média móvel (plateau_window episódios) do regret médio
    variou menos que plateau_tol (relativo) nos últimos plateau_patience episódios.
    """
    serie = pd.Series(mean_regrets, dtype=float)
    if len(serie) < cfg.plateau_window + cfg.plateau_patience:
        return False
    media = serie.rolling(cfg.plateau_window).mean()
    atual, referencia = media.iloc[-1], media.iloc[-1 - cfg.plateau_patience]
    if referencia == 0:
        return atual == 0
    return abs(atual - referencia) <= cfg.plateau_tol * abs(referencia)


class TraceRecorder:
    """Acumula uma linha de trace por passo do ambiente (usado como callback on_step)."""

    def __init__(self):
        self.rows = []

    def __call__(self, episode, n, outcome, eps):
        self.rows.append(
            [len(self.rows) + 1, episode, *np.asarray(outcome.w, dtype=float), *np.asarray(outcome.a, dtype=float),
             outcome.delta, outcome.spacing, outcome.spacing_dev, outcome.regret, eps]
        )

    def to_frame(self):
        trace = pd.DataFrame(self.rows, columns=TRACE_COLUMNS)
        return trace.astype({"step": int, "episode": int})


def _utility(outcome, mode):
    return outcome.stage_regret if mode == "increment" else outcome.u_att


def _run_episode(env, av, att, episode, eps, learn, reward_scale=1.0, utility="increment", on_step=None):
    obs_av, obs_att = env.reset()
    s_av, s_att = obs_av.features(), obs_att.features()
    regrets, deltas = [], []
    n, collision = 0, False

    while not env.done:
        i = av.act(s_av, eps)
        j = att.act(s_att, eps)
        outcome, obs_av, obs_att = env.step(av.actions[i], att.actions[j])
        next_av, next_att = obs_av.features(), obs_att.features()

        if learn:
            gain = _utility(outcome, utility) * reward_scale
            av.remember(Experience(s_av, i, -gain, next_av, initial=n == 0, terminal=outcome.done))
            att.remember(Experience(s_att, j, gain, next_att, initial=n == 0, terminal=outcome.done))
            av.train_step()
            att.train_step()

        if on_step is not None:
            on_step(episode, n, outcome, eps)
        regrets.append(outcome.regret)
        deltas.append(abs(outcome.delta))
        collision = collision or outcome.collision
        s_av, s_att = next_av, next_att
        n += 1

    return {
        "episode": episode,
        "mean_regret": float(np.mean(regrets)),
        "mean_abs_delta": float(np.mean(deltas)),
        "eps_explore": eps,
        "steps": n,
        "collision": collision,
    }


def self_play(env, av, att, cfg, log=print, on_step=None):
    """
    Treina os dois jogadores um contra o outro: a cada passo ambos escolhem ações ε-greedy,
    o ambiente avança, ambos armazenam a experiência e treinam suas redes.

    Parâmetros:
        env (GameEnv | MatrixGameEnv): Ambiente do jogo.
        av (QLearner): Jogador AV (minimiza o regret).
        att (QLearner): Atacante (maximiza o regret).
        cfg (TrainConfig): Hiperparâmetros de treino.
        log (function): Função para registrar logs (padrão: print).
        on_step (callable): Chamado com (episode, n, outcome, eps) a cada passo.

    Retorna:
        pd.DataFrame: Histórico por episódio (HISTORY_COLUMNS).
    """
    historico = []
    for episode in range(cfg.episodes):
        if stop_event.is_set():
            log(f"Treino interrompido antes do episódio {episode}.")
            break
        eps = exploration_rate(episode, cfg)
        linha = _run_episode(env, av, att, episode, eps, learn=True, reward_scale=cfg.reward_scale,
                             utility=cfg.utility, on_step=on_step)
        historico.append(linha)
        log(f"Episódio {episode + 1}/{cfg.episodes}: regret médio {linha['mean_regret']:.6g}, "
            f"|δ| médio {linha['mean_abs_delta']:.4g}, ε={eps:.3f}")
        if plateau_reached([h["mean_regret"] for h in historico], cfg):
            log(f"Regret estabilizado após {episode + 1} episódios.")
            break
    return pd.DataFrame(historico, columns=HISTORY_COLUMNS)


def rollout(env, av, att, episodes=1, log=print, on_step=None):
    """Executa episódios gulosos (ε = 0) sem aprendizado."""
    historico = []
    for episode in range(episodes):
        if stop_event.is_set():
            log(f"Avaliação interrompida antes do episódio {episode}.")
            break
        historico.append(_run_episode(env, av, att, episode, 0.0, learn=False, on_step=on_step))
        log(f"Episódio {episode + 1}/{episodes}: regret médio {historico[-1]['mean_regret']:.6g}")
    return pd.DataFrame(historico, columns=HISTORY_COLUMNS)
