import io
import json
import os
import re
import zipfile

import numpy as np
import pandas as pd

from app.errors import ConfigError, TraceFormatError
from app.globals import CHECKPOINT_VERSION, TRACE_COLUMNS, TRACE_HEADER
from app.process.lstm_qnet import LstmQNet

CHECKPOINT_NAME = "checkpoint.npz"


def criar_diretorios(out_dir):
    """
    Cria o diretório da execução e a subpasta de gráficos.

    Retorna:
        tuple: (diretório da execução, diretório de gráficos).
    """
    graficos_dir = os.path.join(out_dir, "graficos")
    os.makedirs(graficos_dir, exist_ok=True)
    return out_dir, graficos_dir


def salvar_trace(trace, caminho):
    trace.to_csv(caminho, index=False, columns=TRACE_COLUMNS, lineterminator="\n")
    return caminho


def salvar_tabela(df, caminho, index=False):
    df.to_csv(caminho, index=index, lineterminator="\n")
    return caminho


def salvar_texto(texto, caminho):
    with open(caminho, "w", encoding="utf-8", newline="\n") as arquivo:
        arquivo.write(texto)
    return caminho


def salvar_checkpoint(caminho, learners, grid_hash, config=None):
    """
    Grava as redes e grades de ação dos jogadores em um único arquivo .npz.

    Parâmetros:
        caminho (str): Arquivo de saída.
        learners (dict): nome do jogador -> QLearner.
        grid_hash (str): Hash das chaves que definem grades e redes.
        config (dict): Configuração resolvida, gravada como metadado.
    """
    arrays = {}
    for nome, learner in learners.items():
        arrays[f"{nome}.actions"] = learner.actions
        for param, valor in learner.net.params.items():
            arrays[f"{nome}.{param}"] = valor
    meta = {
        "version": CHECKPOINT_VERSION,
        "grid_hash": grid_hash,
        "players": list(learners),
        "config": config or {},
    }
    with open(caminho, "wb") as arquivo:
        np.savez(arquivo, meta=np.array(json.dumps(meta, sort_keys=True)), **arrays)
    return caminho


def carregar_checkpoint(caminho):
    """
    Lê um checkpoint gravado por salvar_checkpoint.

    Arquivos ilegíveis ou incompletos viram ConfigError; arquivo ausente continua OSError.

    Retorna:
        dict: meta (dict), nets (nome -> LstmQNet) e actions (nome -> np.ndarray).
    """
    try:
        with np.load(caminho, allow_pickle=False) as dados:
            meta = json.loads(str(dados["meta"]))
            if meta.get("version") != CHECKPOINT_VERSION:
                raise ConfigError(f"versão de checkpoint {meta.get('version')} não suportada")
            nets, actions = {}, {}
            for nome in meta["players"]:
                nets[nome] = LstmQNet({p: dados[f"{nome}.{p}"] for p in LstmQNet.PARAM_NAMES})
                actions[nome] = dados[f"{nome}.actions"]
    except ConfigError:
        raise
    except (ValueError, KeyError, TypeError, EOFError, zipfile.BadZipFile, AttributeError) as erro:
        raise ConfigError(f"checkpoint {caminho} ilegível: {erro}") from None
    return {"meta": meta, "nets": nets, "actions": actions}


def _linha_do_byte(conteudo, posicao):
    return conteudo.count(b"\n", 0, posicao) + 1


def carregar_trace(caminho):
    """
    Lê e valida um trace CSV: cabeçalho exato e todos os campos numéricos.

    Erros apontam a linha do arquivo (1 = cabeçalho).
    """
    with open(caminho, "rb") as arquivo:
        conteudo = arquivo.read()
    try:
        texto = conteudo.decode("utf-8")
    except UnicodeDecodeError as erro:
        raise TraceFormatError(_linha_do_byte(conteudo, erro.start), "bytes inválidos em UTF-8") from None

    cabecalho = texto.split("\n", 1)[0].rstrip("\r")
    if cabecalho != TRACE_HEADER:
        raise TraceFormatError(1, f"cabeçalho inesperado: {cabecalho!r}")

    try:
        trace = pd.read_csv(io.StringIO(texto), dtype=str, keep_default_na=False)
    except pd.errors.ParserError as erro:
        linha = re.search(r"line (\d+)", str(erro))
        raise TraceFormatError(int(linha.group(1)) if linha else "?", str(erro)) from None

    numerico = trace.apply(pd.to_numeric, errors="coerce")
    invalidos = numerico.isna() | trace.eq("")
    if invalidos.to_numpy().any():
        posicao = int(np.flatnonzero(invalidos.any(axis=1).to_numpy())[0])
        coluna = invalidos.columns[invalidos.iloc[posicao].to_numpy()][0]
        raise TraceFormatError(posicao + 2, f"valor não numérico na coluna {coluna!r}")
    return numerico.astype(float).astype({"step": int, "episode": int})
