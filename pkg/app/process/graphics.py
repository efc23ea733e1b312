import os
import matplotlib
matplotlib.use('Agg')  # Define o backend não interativo
import matplotlib.pyplot as plt

# SVG reprodutível: ids fixos e sem data nos metadados
plt.rcParams["svg.hashsalt"] = "trace"
SVG_METADATA = {"Date": None}

CORES_PESOS = ["#2E86AB", "#A23B72", "#F18F01", "#3B1F2B"]
CORES_ATAQUE = ["#6C9A8B", "#E8998D", "#C73E1D", "#5C4742"]
METRICAS_COMPARACAO = {
    "regret": ("Regret", "m²"),
    "spacing_dev_m": ("Desvio de espaçamento", "metros (m)"),
    "delta": ("Desvio acumulado δ", "m/s"),
}


def _salvar(fig, caminho):
    fig.savefig(caminho, format="svg", metadata=SVG_METADATA)
    plt.close(fig)
    return caminho


def _serie(nome, valores, cor):
    return {"nome": nome, "valores": [float(v) for v in valores], "cor": cor}


def gerar_grafico_acoes(trace, graficos_dir, nome="trace"):
    """
    Gera o gráfico das ações dos dois jogadores (pesos do AV e injeções do atacante) ao longo dos passos.

    Retorna:
        dict: Dados do gráfico (título, séries e eixos), um ponto por linha do trace.
    """
    passos = trace["step"].tolist()
    series_w = [_serie(f"w{k}", trace[f"w{k}"], CORES_PESOS[k - 1]) for k in range(1, 5)]
    series_a = [_serie(f"a{k}", trace[f"a{k}"], CORES_ATAQUE[k - 1]) for k in range(1, 5)]

    fig, (ax_w, ax_a) = plt.subplots(2, 1, sharex=True, figsize=(8, 6))
    for serie in series_w:
        ax_w.plot(passos, serie["valores"], label=serie["nome"], color=serie["cor"], linewidth=0.8)
    for serie in series_a:
        ax_a.plot(passos, serie["valores"], label=serie["nome"], color=serie["cor"], linewidth=0.8)
    ax_w.set_title(f"Ações - {nome}")
    ax_w.set_ylabel("Peso de fusão")
    ax_a.set_ylabel("Injeção (m/s)")
    ax_a.set_xlabel("Passo")
    ax_w.legend(loc="upper right", fontsize="small")
    ax_a.legend(loc="upper right", fontsize="small")
    caminho = _salvar(fig, os.path.join(graficos_dir, "actions.svg"))

    return {
        "titulo": f"Ações - {nome}",
        "tipo": "line",
        "arquivo": caminho,
        "dados": {"passos": passos, "series": series_w + series_a},
        "eixos": {"x": "Passo", "y": "Peso / injeção"},
    }


def _grafico_linha(trace, coluna, titulo, eixo_y, caminho, cor):
    passos = trace["step"].tolist()
    serie = _serie(coluna, trace[coluna], cor)
    fig, ax = plt.subplots(figsize=(8, 4))
    ax.plot(passos, serie["valores"], color=cor, linewidth=0.8)
    ax.set_title(titulo)
    ax.set_xlabel("Passo")
    ax.set_ylabel(eixo_y)
    _salvar(fig, caminho)
    return {
        "titulo": titulo,
        "tipo": "line",
        "arquivo": caminho,
        "dados": {"passos": passos, "series": [serie]},
        "eixos": {"x": "Passo", "y": eixo_y},
    }


def gerar_grafico_regret(trace, graficos_dir, nome="trace"):
    return _grafico_linha(trace, "regret", f"Regret - {nome}", "m²",
                          os.path.join(graficos_dir, "regret.svg"), "#C73E1D")


def gerar_grafico_desvio(trace, graficos_dir, nome="trace"):
    return _grafico_linha(trace, "spacing_dev_m", f"Desvio de espaçamento - {nome}", "metros (m)",
                          os.path.join(graficos_dir, "spacing_dev.svg"), "#2E86AB")


def gerar_graficos_comparacao(traces, graficos_dir, log=print):
    """
    Sobrepõe dois ou mais traces, um gráfico por métrica (regret, spacing_dev_m, delta).

    Parâmetros:
        traces (dict): rótulo -> DataFrame do trace.
        graficos_dir (str): Diretório de saída.

    Retorna:
        list: Dados de cada gráfico de comparação.
    """
    resultados = []
    for coluna, (titulo, eixo_y) in METRICAS_COMPARACAO.items():
        fig, ax = plt.subplots(figsize=(8, 4))
        series = []
        for (rotulo, trace), cor in zip(traces.items(), CORES_PESOS):
            serie = _serie(rotulo, trace[coluna], cor)
            series.append(serie)
            ax.plot(trace["step"].tolist(), serie["valores"], label=rotulo, color=cor, linewidth=0.8)
        ax.set_title(f"{titulo} - comparação")
        ax.set_xlabel("Passo")
        ax.set_ylabel(eixo_y)
        ax.legend(loc="upper left", fontsize="small")
        caminho = _salvar(fig, os.path.join(graficos_dir, f"compare_{coluna}.svg"))
        resultados.append({
            "titulo": f"{titulo} - comparação",
            "tipo": "line",
            "arquivo": caminho,
            "dados": {"series": series},
            "eixos": {"x": "Passo", "y": eixo_y},
        })
    log(f"Gráficos de comparação gerados em {graficos_dir}")
    return resultados
