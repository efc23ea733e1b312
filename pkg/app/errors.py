class SimulacaoError(RuntimeError):
    """Erro base do simulador."""


class ConfigError(SimulacaoError, ValueError):
    """Configuração inválida (chave desconhecida, valor fora da faixa, grade incompatível)."""


class ContractError(SimulacaoError, ValueError):
    """Pré-condição de uma operação violada pelo chamador."""


class RejectedActionError(ContractError):
    """Ação de ataque fora dos limites do cenário."""

    def __init__(self, sensor, message):
        super().__init__(f"sensor '{sensor}': {message}")
        self.sensor = sensor


class LifecycleError(SimulacaoError):
    """Operação chamada fora do ciclo de vida do episódio."""


class NumericalError(SimulacaoError, ArithmeticError):
    """Falha numérica (NaN/inf, sistema degenerado)."""


class TraceFormatError(ContractError):
    """Arquivo de trace malformado; `line` é a linha do CSV (1 = cabeçalho)."""

    def __init__(self, line, message):
        super().__init__(f"linha {line}: {message}")
        self.line = line
