import itertools
from dataclasses import dataclass

import numpy as np
import pandas as pd

from app.errors import ContractError, NumericalError
from app.process.game_env import theta
from app.process.self_play import TraceRecorder, rollout
from app.process.sensing_fusion import inverse_variance_weights

EXACT_MAX_DIM = 4
EQUILIBRIUM_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class PayoffMatrix:
    """Payoff do atacante (linhas: ações do AV, que minimiza; colunas: ações do atacante, que maximiza)."""

    values: np.ndarray

    def __post_init__(self):
        values = np.atleast_2d(np.asarray(self.values, dtype=float))
        if values.ndim != 2 or not values.size or not np.all(np.isfinite(values)):
            raise ContractError("matriz de payoff vazia ou com valores não finitos")
        object.__setattr__(self, "values", values)

    @property
    def shape(self):
        return self.values.shape

    def to_frame(self):
        rows, cols = self.shape
        return pd.DataFrame(
            self.values,
            index=pd.Index([f"av_{i}" for i in range(rows)], name="acao_av"),
            columns=[f"att_{j}" for j in range(cols)],
        )


def matching_pennies():
    return PayoffMatrix(np.array([[1.0, -1.0], [-1.0, 1.0]]))


def expected_payoff_matrix(av_grid, att_grid, noise):
    """
    Payoff esperado de um passo: E[(wᵀe + wᵀa)²] = (wᵀa)² + Σ_k w_k²σ_k².

    Parâmetros:
        av_grid (np.ndarray): Pesos de fusão, um por linha.
        att_grid (np.ndarray): Vetores de ataque, um por linha.
        noise (NoiseModel): Desvios-padrão dos sensores.

    Retorna:
        PayoffMatrix: |av_grid| × |att_grid|.
    """
    W = np.atleast_2d(np.asarray(av_grid, dtype=float))
    A = np.atleast_2d(np.asarray(att_grid, dtype=float))
    if not len(W) or not len(A):
        raise ContractError("grades de ação vazias")
    bias = (W @ A.T) ** 2
    variance = (W ** 2) @ noise.variances
    return PayoffMatrix(bias + variance[:, None])


def exploitability(payoff, p, q):
    """Ganho máximo de um desvio unilateral: max_j (pA)_j − min_i (Aq)_i."""
    A = payoff.values if isinstance(payoff, PayoffMatrix) else np.asarray(payoff, dtype=float)
    return float(np.max(p @ A) - np.min(A @ q))


def fictitious_play(payoff, iterations, log_every=100):
    """
    Fictitious play simultâneo: cada jogador responde otimamente às frequências empíricas do outro.
    Empates são resolvidos pelo menor índice.

    Retorna:
        tuple: (p, q, valor, exploitability, log), onde log é um DataFrame
        com iteration, value e exploitability a cada log_every iterações.
    """
    if iterations < 1:
        raise ContractError(f"iterations = {iterations} deve ser >= 1")
    A = payoff.values
    rows, cols = A.shape
    row_counts, col_counts = np.zeros(rows), np.zeros(cols)
    row_cum, col_cum = np.zeros(rows), np.zeros(cols)
    i, j = 0, 0
    registros = []

    for t in range(1, iterations + 1):
        row_counts[i] += 1
        col_counts[j] += 1
        row_cum += A[:, j]
        col_cum += A[i, :]
        i, j = int(np.argmin(row_cum)), int(np.argmax(col_cum))
        if t % log_every == 0 or t == iterations:
            p, q = row_counts / t, col_counts / t
            gap = exploitability(A, p, q)
            registros.append({"iteration": t, "value": float(np.min(A @ q)) + gap / 2, "exploitability": gap})

    p, q = row_counts / iterations, col_counts / iterations
    log = pd.DataFrame(registros, columns=["iteration", "value", "exploitability"])
    final = registros[-1]
    return p, q, final["value"], final["exploitability"], log


def _solve_indifference(M, support_self, support_other):
    """
    Resolve a estratégia do oponente sobre support_other que torna indiferentes
    as ações de support_self: M[s, support_other] @ x = v, Σx = 1.
    """
    k_self, k_other = len(support_self), len(support_other)
    system = np.zeros((k_self + 1, k_other + 1))
    system[:k_self, :k_other] = M[np.ix_(support_self, support_other)]
    system[:k_self, k_other] = -1.0
    system[k_self, :k_other] = 1.0
    rhs = np.zeros(k_self + 1)
    rhs[k_self] = 1.0
    solution, *_ = np.linalg.lstsq(system, rhs, rcond=None)
    if np.max(np.abs(system @ solution - rhs)) > EQUILIBRIUM_TOL:
        return None
    x = np.zeros(M.shape[1])
    x[list(support_other)] = solution[:k_other]
    if np.any(x < -EQUILIBRIUM_TOL):
        return None
    x = np.clip(x, 0.0, None)
    return x / x.sum()


def exact_msne_small(payoff):
    """
    Equilíbrio de Nash misto exato por enumeração de suportes (matrizes até 4×4).

    Retorna:
        tuple: (p, q, valor) com p sobre as linhas (AV) e q sobre as colunas (atacante).
    """
    A = payoff.values
    rows, cols = A.shape
    if rows > EXACT_MAX_DIM or cols > EXACT_MAX_DIM:
        raise ContractError(f"solver exato limitado a {EXACT_MAX_DIM}×{EXACT_MAX_DIM}; matriz {rows}×{cols}")

    supports = sorted(
        itertools.product(
            [s for k in range(1, rows + 1) for s in itertools.combinations(range(rows), k)],
            [s for k in range(1, cols + 1) for s in itertools.combinations(range(cols), k)],
        ),
        key=lambda pair: (max(len(pair[0]), len(pair[1])), len(pair[0]) + len(pair[1])),
    )
    for row_support, col_support in supports:
        q = _solve_indifference(A, row_support, col_support)
        p = _solve_indifference(A.T, col_support, row_support)
        if p is None or q is None:
            continue
        value = float(p @ A @ q)
        # nenhum desvio puro pode melhorar: AV não baixa o valor, atacante não o aumenta
        if np.min(A @ q) >= value - EQUILIBRIUM_TOL and np.max(p @ A) <= value + EQUILIBRIUM_TOL:
            return p, q, value
    raise NumericalError("nenhum suporte produziu um equilíbrio verificável")


def noise_floor(follow, w, noise, steps, engage_delay=0):
    """
    Regret médio esperado por passo num episódio sem ataque, com pesos fixos w.

    Cada termo de ruído wᵀe(m) entra em δ(N) com coeficiente Σ_{l=0}^{min(n̄, N-m)} q^l,
    logo E[δ(N)²] = (Σ_k w_k²σ_k²)·Σ_m coef². Termos anteriores ao engate são nulos.
    """
    s2 = float((np.asarray(w, dtype=float) ** 2) @ noise.variances)
    acumulado = np.cumsum(follow.q ** np.arange(follow.n_bar + 1))
    total = 0.0
    for N in range(1, steps + 1):
        m = np.arange(engage_delay + 1, N + 1)
        coef = acumulado[np.minimum(follow.n_bar, N - m)]
        total += s2 * float(np.sum(coef ** 2))
    return follow.lam ** 2 * follow.T ** 4 * total / steps


class StaticWeightsPlayer:
    """AV com pesos fixos (variância inversa por padrão): sempre a mesma ação."""

    def __init__(self, w):
        self.actions = np.asarray(w, dtype=float)[None, :]

    def act(self, state, eps):
        return 0


class WorstCaseAttacker:
    """
    Atacante de envelope superior: a cada passo escolhe na grade a injeção que maximiza
    o próximo δ² contra os pesos fixos do AV, ignorando o ruído (menor índice em empates).
    """

    def __init__(self, env, actions, w):
        self.env = env
        self.actions = np.asarray(actions, dtype=float)
        self.w = np.asarray(w, dtype=float)

    def act(self, state, eps):
        deviation = self.env.deviation
        base = deviation.delta + self.env.follow.q * theta(deviation.terms, self.env.follow.q)
        return int(np.argmax((base + self.actions @ self.w) ** 2))


def kalman_static_run(env, att_actions, attacker=None, episodes=1, log=print):
    """
    Executa o ambiente com pesos estáticos de variância inversa contra um atacante
    congelado (QLearner treinado) ou, sem atacante, contra o pior caso da grade.

    Retorna:
        tuple: (trace por passo, histórico por episódio) como DataFrames.
    """
    w = inverse_variance_weights(env.noise)
    av = StaticWeightsPlayer(w)
    if attacker is None:
        attacker = WorstCaseAttacker(env, att_actions, w)
        log("Atacante: pior ação da grade a cada passo.")
    else:
        log("Atacante: política treinada congelada.")
    recorder = TraceRecorder()
    historico = rollout(env, av, attacker, episodes=episodes, log=log, on_step=recorder)
    return recorder.to_frame(), historico
