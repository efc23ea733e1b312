import os
import time

import pandas as pd

from app.dto.dtos import ResumoDTO
from app.errors import ConfigError
from app.process.baselines import (
    exact_msne_small,
    expected_payoff_matrix,
    fictitious_play,
    kalman_static_run,
    matching_pennies,
)
from app.process.file_operations import (
    CHECKPOINT_NAME,
    carregar_checkpoint,
    carregar_trace,
    criar_diretorios,
    salvar_checkpoint,
    salvar_tabela,
    salvar_texto,
    salvar_trace,
)
from app.process.game_env import FEATURE_DIM
from app.process.graphics import (
    gerar_grafico_acoes,
    gerar_grafico_desvio,
    gerar_grafico_regret,
    gerar_graficos_comparacao,
)
from app.process.q_learning import QLearner
from app.process.self_play import TraceRecorder, rollout, self_play
from app.process.utils import resumir_trace

PLAYERS = ("av", "att")


def _gravar_resultados(comando, cfg, out_dir, trace, historico, inicio, log=print):
    salvar_trace(trace, os.path.join(out_dir, "trace.csv"))
    salvar_tabela(historico, os.path.join(out_dir, "history.csv"))
    estatisticas = resumir_trace(trace)
    resumo = ResumoDTO(
        comando=comando,
        scenario=cfg["scenario"],
        seed=cfg["seed"],
        episodes_run=len(historico),
        steps=len(trace),
        mean_regret_final=estatisticas["mean_regret_final"],
        mean_regret_first=estatisticas["mean_regret_first"],
        mean_abs_spacing_dev_final=estatisticas["mean_abs_spacing_dev_final"],
        mean_w_final=estatisticas["mean_w_final"],
        collisions=int(historico["collision"].sum()) if len(historico) else 0,
        wall_time_s=round(time.perf_counter() - inicio, 3),
    )
    salvar_texto(resumo.to_text(), os.path.join(out_dir, "summary.txt"))
    log(f"Resultados gravados em {out_dir}: trace.csv, history.csv, summary.txt")
    return resumo


def _learners_do_checkpoint(caminho, cfg, rngs):
    checkpoint = carregar_checkpoint(caminho)
    if checkpoint["meta"]["grid_hash"] != cfg.grid_hash():
        raise ConfigError(f"checkpoint {caminho} incompatível com a configuração (grades ou rede diferentes)")
    train_cfg = cfg.train_config()
    return {
        nome: QLearner(checkpoint["actions"][nome], checkpoint["nets"][nome], train_cfg, rng)
        for nome, rng in zip(PLAYERS, rngs)
    }


def executar_treino(cfg, log=print):
    """
    Treina AV e atacante por self-play e grava trace, histórico, checkpoint e resumo.

    Parâmetros:
        cfg (ExperimentConfig): Configuração validada.
        log (function): Função para registrar logs (padrão: print).

    Retorna:
        ResumoDTO: Estatísticas de resumo da execução.
    """
    inicio = time.perf_counter()
    out_dir, _ = criar_diretorios(cfg["out"])
    salvar_texto(cfg.lock_text(), os.path.join(out_dir, "config.lock"))

    env_rng, av_rng, att_rng = cfg.rng_streams()
    env = cfg.build_env(env_rng)
    grade = cfg.action_grid()
    train_cfg = cfg.train_config()
    av = QLearner.create(grade.av_actions, FEATURE_DIM, train_cfg, av_rng)
    att = QLearner.create(grade.att_actions, FEATURE_DIM, train_cfg, att_rng)
    log(f"Cenário {cfg['scenario']}: {len(grade.av_actions)} ações do AV, "
        f"{len(grade.att_actions)} do atacante, janela {env.window}.")

    recorder = TraceRecorder()
    historico = self_play(env, av, att, train_cfg, log=log, on_step=recorder)

    salvar_checkpoint(os.path.join(out_dir, CHECKPOINT_NAME), {"av": av, "att": att},
                      cfg.grid_hash(), cfg.to_dict())
    log("Checkpoint gravado.")
    return _gravar_resultados("train", cfg, out_dir, recorder.to_frame(), historico, inicio, log=log)


def executar_avaliacao(cfg, checkpoint, log=print):
    """Rollouts gulosos (ε = 0) dos jogadores de um checkpoint, sem aprendizado."""
    inicio = time.perf_counter()
    out_dir, _ = criar_diretorios(cfg["out"])
    salvar_texto(cfg.lock_text(), os.path.join(out_dir, "config.lock"))

    env_rng, av_rng, att_rng = cfg.rng_streams()
    learners = _learners_do_checkpoint(checkpoint, cfg, (av_rng, att_rng))
    env = cfg.build_env(env_rng)
    recorder = TraceRecorder()
    historico = rollout(env, learners["av"], learners["att"], episodes=cfg["episodes"], log=log, on_step=recorder)
    return _gravar_resultados("eval", cfg, out_dir, recorder.to_frame(), historico, inicio, log=log)


def executar_baseline(cfg, log=print):
    """Linha de base de pesos estáticos (variância inversa) contra o pior caso ou um atacante treinado."""
    inicio = time.perf_counter()
    out_dir, _ = criar_diretorios(cfg["out"])
    salvar_texto(cfg.lock_text(), os.path.join(out_dir, "config.lock"))

    env_rng, av_rng, att_rng = cfg.rng_streams()
    env = cfg.build_env(env_rng)
    grade = cfg.action_grid()
    atacante = None
    if cfg["baseline_attacker"] != "worst":
        atacante = _learners_do_checkpoint(cfg["baseline_attacker"], cfg, (av_rng, att_rng))["att"]
    trace, historico = kalman_static_run(env, grade.att_actions, atacante, episodes=cfg["episodes"], log=log)
    return _gravar_resultados("baseline", cfg, out_dir, trace, historico, inicio, log=log)


def executar_oraculo(cfg, exato=False, matching=False, iteracoes=None, log=print):
    """
    Resolve o jogo de um passo (ou matching pennies) por fictitious play e, opcionalmente,
    por enumeração de suportes. Grava payoff.csv, strategies.csv, fp_log.csv e oracle.txt.

    Retorna:
        dict: Valores, exploitability e estratégias.
    """
    out_dir, _ = criar_diretorios(cfg["out"])
    if matching:
        payoff = matching_pennies()
        log("Jogo: matching pennies.")
    else:
        grade = cfg.action_grid()
        payoff = expected_payoff_matrix(grade.av_actions, grade.att_actions, cfg.noise_model())
        log(f"Jogo de um passo: matriz {payoff.shape[0]}×{payoff.shape[1]}.")
    if exato:
        # falha cedo, antes do fictitious play, se a matriz não couber no solver exato
        p_exato, q_exato, valor_exato = exact_msne_small(payoff)

    iteracoes = iteracoes or cfg["fp_iterations"]
    p, q, valor, explorabilidade, fp_log = fictitious_play(payoff, iteracoes)
    log(f"Fictitious play ({iteracoes} iterações): valor {valor:.6g}, exploitability {explorabilidade:.3g}")

    estrategias = pd.concat([
        pd.DataFrame({"player": "av", "action": range(len(p)), "fp_prob": p}),
        pd.DataFrame({"player": "att", "action": range(len(q)), "fp_prob": q}),
    ], ignore_index=True)
    relatorio = {"iterations": iteracoes, "value_fp": valor, "exploitability_fp": explorabilidade}
    if exato:
        estrategias["exact_prob"] = list(p_exato) + list(q_exato)
        relatorio["value_exact"] = valor_exato
        log(f"Equilíbrio exato: valor {valor_exato:.6g}")

    salvar_tabela(payoff.to_frame(), os.path.join(out_dir, "payoff.csv"), index=True)
    salvar_tabela(estrategias, os.path.join(out_dir, "strategies.csv"))
    salvar_tabela(fp_log, os.path.join(out_dir, "fp_log.csv"))
    salvar_texto("".join(f"{k}={v!r}\n" if isinstance(v, float) else f"{k}={v}\n" for k, v in relatorio.items()),
                 os.path.join(out_dir, "oracle.txt"))
    log(f"Relatório do oráculo gravado em {out_dir}")
    return {**relatorio, "p": p, "q": q, "strategies": estrategias, "fp_log": fp_log}


def executar_graficos(caminhos, out_dir, log=print):
    """
    Gera os gráficos SVG de um trace (ações, regret, desvio) ou a comparação de vários traces.

    Retorna:
        list: Dados dos gráficos gerados.
    """
    os.makedirs(out_dir, exist_ok=True)
    traces = {os.path.splitext(os.path.basename(c))[0] or c: carregar_trace(c) for c in caminhos}
    if len(traces) < len(caminhos):
        traces = {f"{i + 1}:{c}": carregar_trace(c) for i, c in enumerate(caminhos)}

    if len(traces) == 1:
        (nome, trace), = traces.items()
        dados = [
            gerar_grafico_acoes(trace, out_dir, nome),
            gerar_grafico_regret(trace, out_dir, nome),
            gerar_grafico_desvio(trace, out_dir, nome),
        ]
        log(f"Gráficos gerados em {out_dir} ({len(trace)} passos).")
        return dados
    return gerar_graficos_comparacao(traces, out_dir, log=log)
