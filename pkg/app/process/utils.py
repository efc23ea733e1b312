import os

import numpy as np
from dotenv import dotenv_values

from app.dto.dtos import ExperimentConfig
from app.errors import ConfigError


def interpretar_sobrescritas(pares):
    """Converte pares 'chave=valor' (opção --set) em dicionário."""
    resultado = {}
    for par in pares or ():
        chave, sep, valor = par.partition("=")
        if not sep or not chave.strip():
            raise ConfigError(f"--set espera chave=valor, recebeu {par!r}")
        resultado[chave.strip()] = valor.strip()
    return resultado


def carregar_config(caminho=None, flags=None, sobrescritas=(), base=None, log=print):
    """
    Resolve a configuração do experimento: padrões < arquivo key=value < flags < --set.

    Parâmetros:
        caminho (str): Arquivo de configuração (opcional).
        flags (dict): Valores das flags nomeadas; None significa "não informado".
        sobrescritas (list): Pares 'chave=valor' da opção --set.
        base (dict): Valores de partida no lugar dos padrões (ex.: config de um checkpoint).
        log (function): Função para registrar logs (padrão: print).

    Retorna:
        ExperimentConfig: Configuração validada.
    """
    valores = dict(base or {})
    if caminho:
        if not os.path.isfile(caminho):
            raise FileNotFoundError(f"arquivo de configuração não encontrado: {caminho}")
        arquivo = dotenv_values(caminho, interpolate=False)
        sem_valor = [chave for chave, valor in arquivo.items() if valor is None]
        if sem_valor:
            raise ConfigError(f"chaves sem valor em {caminho}: {', '.join(sem_valor)}")
        valores.update(arquivo)
        log(f"Configuração lida de {caminho} ({len(arquivo)} chaves).")
    valores.update({chave: valor for chave, valor in (flags or {}).items() if valor is not None})
    valores.update(interpretar_sobrescritas(sobrescritas))
    return ExperimentConfig(**valores)


def _janela(trace, fracao, final):
    tamanho = max(1, int(np.ceil(len(trace) * fracao)))
    return trace.tail(tamanho) if final else trace.head(tamanho)


def resumir_trace(trace, fracao=0.1):
    """
    Estatísticas de resumo de um trace: médias na janela final e inicial (fração das linhas).

    Retorna:
        dict: mean_regret_final, mean_regret_first, mean_abs_spacing_dev_final e mean_w_final (4 pesos).
    """
    if trace.empty:
        return {
            "mean_regret_final": float("nan"),
            "mean_regret_first": float("nan"),
            "mean_abs_spacing_dev_final": float("nan"),
            "mean_w_final": [float("nan")] * 4,
        }
    final = _janela(trace, fracao, final=True)
    inicio = _janela(trace, fracao, final=False)
    return {
        "mean_regret_final": float(final["regret"].mean()),
        "mean_regret_first": float(inicio["regret"].mean()),
        "mean_abs_spacing_dev_final": float(final["spacing_dev_m"].abs().mean()),
        "mean_w_final": [float(final[f"w{k}"].mean()) for k in range(1, 5)],
    }
