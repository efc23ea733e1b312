import click
from flask import Blueprint

from app.commands.opcoes import flags_nomeadas, opcoes_experimento, tratar_erros
from app.models import executar_graficos, executar_oraculo
from app.process.utils import carregar_config

analysis_bp = Blueprint("analysis_commands", __name__, cli_group=None)


@analysis_bp.cli.command("oracle")
@opcoes_experimento
@click.option("--exact", is_flag=True, help="Resolve também por enumeração de suportes (até 4×4).")
@click.option("--matching-pennies", "matching", is_flag=True, help="Usa a matriz de teste matching pennies.")
@click.option("--iterations", type=int, default=None, help="Iterações do fictitious play.")
@tratar_erros
def oracle(config_path, scenario, seed, episodes, steps_per_episode, out, sobrescritas, exact, matching, iterations):
    """Equilíbrio do jogo de um passo: matriz de payoff, estratégias, valor e exploitability."""
    cfg = carregar_config(config_path, flags_nomeadas(scenario, seed, episodes, steps_per_episode, out),
                          sobrescritas, log=click.echo)
    relatorio = executar_oraculo(cfg, exato=exact, matching=matching, iteracoes=iterations, log=click.echo)
    for chave in ("iterations", "value_fp", "exploitability_fp", "value_exact"):
        if chave in relatorio:
            click.echo(f"{chave}={relatorio[chave]}")


@analysis_bp.cli.command("plot")
@click.argument("traces", nargs=-1, required=True, type=click.Path(dir_okay=False))
@click.option("--out", default="graficos", type=click.Path(file_okay=False), help="Diretório dos SVGs.")
@tratar_erros
def plot(traces, out):
    """Gera gráficos SVG de um trace, ou a comparação de dois traces."""
    dados = executar_graficos(list(traces), out, log=click.echo)
    for grafico in dados:
        click.echo(grafico["arquivo"])
