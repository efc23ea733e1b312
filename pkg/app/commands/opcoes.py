import functools

import click

from app.errors import ConfigError, ContractError, NumericalError, SimulacaoError, TraceFormatError

# exceção -> (prefixo da mensagem, código de saída); a primeira correspondência vence
CODIGOS_SAIDA = (
    (TraceFormatError, "trace", 2),
    (ConfigError, "config", 2),
    (ContractError, "contract", 2),
    (NumericalError, "numerical", 4),
    (SimulacaoError, "simulation", 4),
    (OSError, "io", 3),
)


def tratar_erros(comando):
    """Converte as exceções do domínio em 'error[<tipo>]: <mensagem>' no stderr e código de saída."""

    @functools.wraps(comando)
    def wrapper(*args, **kwargs):
        try:
            return comando(*args, **kwargs)
        except tuple(exc for exc, _, _ in CODIGOS_SAIDA) as erro:
            for exc, tipo, codigo in CODIGOS_SAIDA:
                if isinstance(erro, exc):
                    click.echo(f"error[{tipo}]: {erro}", err=True)
                    raise click.exceptions.Exit(codigo) from None
            raise

    return wrapper


def opcoes_experimento(comando):
    """Opções comuns a train, eval, baseline e oracle."""
    opcoes = [
        click.option("--config", "config_path", type=click.Path(dir_okay=False), default=None,
                     help="Arquivo key=value com a configuração."),
        click.option("--scenario", type=click.Choice(["none", "beacon", "beacon_only", "all"]), default=None,
                     help="Sensores atacáveis."),
        click.option("--seed", type=int, default=None, help="Semente do experimento."),
        click.option("--episodes", type=int, default=None, help="Número de episódios."),
        click.option("--steps", "steps_per_episode", type=int, default=None, help="Passos por episódio."),
        click.option("--out", type=click.Path(file_okay=False), default=None, help="Diretório de saída."),
        click.option("--set", "sobrescritas", multiple=True, metavar="KEY=VALUE",
                     help="Sobrescreve uma chave da configuração (repetível)."),
    ]
    for opcao in reversed(opcoes):
        comando = opcao(comando)
    return comando


def flags_nomeadas(scenario, seed, episodes, steps_per_episode, out):
    return {"scenario": scenario, "seed": seed, "episodes": episodes,
            "steps_per_episode": steps_per_episode, "out": out}
