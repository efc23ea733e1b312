import os

import click
from flask import Blueprint

from app.commands.opcoes import flags_nomeadas, opcoes_experimento, tratar_erros
from app.globals import stop_event
from app.models import executar_avaliacao, executar_baseline, executar_treino
from app.process.file_operations import carregar_checkpoint
from app.process.utils import carregar_config

experiment_bp = Blueprint("experiment_commands", __name__, cli_group=None)


def _imprimir_resumo(resumo):
    for chave, valor in resumo.to_dict().items():
        click.echo(f"{chave}={valor}")


@experiment_bp.cli.command("train")
@opcoes_experimento
@tratar_erros
def train(config_path, scenario, seed, episodes, steps_per_episode, out, sobrescritas):
    """Treina AV e atacante por self-play."""
    stop_event.clear()
    cfg = carregar_config(config_path, flags_nomeadas(scenario, seed, episodes, steps_per_episode, out),
                          sobrescritas, log=click.echo)
    click.echo("Iniciando treino...")
    _imprimir_resumo(executar_treino(cfg, log=click.echo))


@experiment_bp.cli.command("eval")
@click.option("--checkpoint", required=True, type=click.Path(dir_okay=False), help="Checkpoint gravado por train.")
@opcoes_experimento
@tratar_erros
def evaluate(checkpoint, config_path, scenario, seed, episodes, steps_per_episode, out, sobrescritas):
    """Avalia um checkpoint com políticas gulosas, sem aprendizado."""
    stop_event.clear()
    base = carregar_checkpoint(checkpoint)["meta"]["config"]
    out = out or os.path.join(os.path.dirname(os.path.abspath(checkpoint)), "eval")
    cfg = carregar_config(config_path, flags_nomeadas(scenario, seed, episodes, steps_per_episode, out),
                          sobrescritas, base=base, log=click.echo)
    click.echo("Iniciando avaliação...")
    _imprimir_resumo(executar_avaliacao(cfg, checkpoint, log=click.echo))


@experiment_bp.cli.command("baseline")
@opcoes_experimento
@tratar_erros
def baseline(config_path, scenario, seed, episodes, steps_per_episode, out, sobrescritas):
    """Linha de base com pesos estáticos de variância inversa."""
    stop_event.clear()
    cfg = carregar_config(config_path, flags_nomeadas(scenario, seed, episodes, steps_per_episode, out),
                          sobrescritas, log=click.echo)
    click.echo("Iniciando linha de base...")
    _imprimir_resumo(executar_baseline(cfg, log=click.echo))
