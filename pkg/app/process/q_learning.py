import itertools
from collections import deque
from dataclasses import dataclass

import numpy as np

from app.errors import ConfigError, NumericalError
from app.globals import SENSORS
from app.process.lstm_qnet import LstmQNet


@dataclass(frozen=True)
class TrainConfig:
    beta: float = 0.01
    gamma: float = 0.5
    eps_start: float = 1.0
    eps_end: float = 0.05
    eps_decay: float = 0.5
    explore_mode: str = "anneal"
    episodes: int = 30
    steps_per_episode: int = 1000
    seed: int = 0
    hidden_dim: int = 32
    batch_size: int = 1
    memory_capacity: int = 10_000
    grad_clip: float = 10.0
    reward_scale: float = 100.0
    # "increment": utilidade do passo é λ²T⁴θ(n)²; "regret": λ²T⁴δ(n)² acumulado
    utility: str = "increment"
    frozen_target: bool = False
    target_refresh: int = 1000
    terminal_cutoff: bool = False
    plateau_window: int = 50
    plateau_patience: int = 100
    plateau_tol: float = 0.01

    def __post_init__(self):
        if not 0.0 <= self.gamma < 1.0:
            raise ConfigError(f"gamma = {self.gamma} fora de [0, 1)")
        if self.beta <= 0:
            raise ConfigError(f"beta = {self.beta} deve ser positivo")
        for name in ("eps_start", "eps_end", "eps_decay"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ConfigError(f"{name} = {getattr(self, name)} fora de [0, 1]")
        if self.explore_mode not in ("anneal", "fixed"):
            raise ConfigError(f"explore_mode desconhecido: {self.explore_mode}")
        if self.utility not in ("increment", "regret"):
            raise ConfigError(f"utility desconhecida: {self.utility}")
        for name in ("episodes", "steps_per_episode", "hidden_dim", "batch_size",
                     "memory_capacity", "target_refresh", "plateau_window", "plateau_patience"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} = {getattr(self, name)} deve ser >= 1")

    def exploration_rate(self, episode):
        if self.explore_mode == "fixed":
            return self.eps_start
        return self.eps_end + (self.eps_start - self.eps_end) * self.eps_decay ** episode


@dataclass(frozen=True, eq=False)
class ActionGrid:
    av_actions: np.ndarray
    att_actions: np.ndarray


def simplex_lattice(resolution=4):
    """Todos os pontos do simplex de 4 pesos com passo 1/resolution (35 para resolution=4)."""
    if resolution < 1:
        raise ConfigError(f"weight_resolution = {resolution} deve ser >= 1")
    points = [c for c in itertools.product(range(resolution + 1), repeat=len(SENSORS)) if sum(c) == resolution]
    return np.asarray(points, dtype=float) / resolution


def attack_lattice(attack_scenario, levels=5):
    """Produto cartesiano dos níveis τ·linspace(-1, 1, levels) nos sensores atacáveis."""
    if levels < 1:
        raise ConfigError(f"attack_levels = {levels} deve ser >= 1")
    unit = np.linspace(-1.0, 1.0, levels) if levels > 1 else np.zeros(1)
    per_sensor = [
        [t * u for u in unit] if attackable else [0.0]
        for attackable, t in zip(attack_scenario.mask, attack_scenario.tau)
    ]
    # dict preserva a ordem e remove duplicatas (τ = 0)
    unique = dict.fromkeys(tuple(float(x) + 0.0 for x in combo) for combo in itertools.product(*per_sensor))
    return np.asarray(list(unique), dtype=float)


def build_action_grid(attack_scenario, weight_resolution=4, attack_levels=5):
    return ActionGrid(simplex_lattice(weight_resolution), attack_lattice(attack_scenario, attack_levels))


@dataclass(frozen=True, eq=False)
class Experience:
    state: np.ndarray
    action: int
    utility: float
    next_state: np.ndarray
    initial: bool = False
    terminal: bool = False


class ReplayMemory:
    """Memória de replay FIFO com amostragem uniforme."""

    def __init__(self, capacity=10_000):
        if capacity < 1:
            raise ConfigError(f"memory_capacity = {capacity} deve ser >= 1")
        self.capacity = capacity
        self.entries = deque(maxlen=capacity)

    def __len__(self):
        return len(self.entries)

    def store(self, experience):
        self.entries.append(experience)

    def sample_indices(self, rng, k=1):
        return rng.integers(0, len(self.entries), size=k)

    def sample(self, rng, k=1):
        return [self.entries[i] for i in self.sample_indices(rng, k)]


def select_action(q, eps, rng):
    """ε-greedy: com probabilidade eps um índice uniforme; senão o argmax (menor índice em empates)."""
    q = np.asarray(q, dtype=float)
    if rng.random() < eps:
        return int(rng.integers(q.size))
    return int(np.argmax(q))


def td_target(exp, gamma, net, target_net=None, terminal_cutoff=False):
    if exp.initial or gamma == 0.0 or (terminal_cutoff and exp.terminal):
        return exp.utility
    bootstrap = (target_net or net).q_values(exp.next_state)
    return exp.utility + gamma * float(np.max(bootstrap))


def tabular_q_update(table, s, a, utility, s_next, beta, gamma):
    """Atualização de Q-learning tabular; devolve uma nova tabela."""
    updated = np.array(table, dtype=float, copy=True)
    target = utility + gamma * np.max(updated[s_next])
    updated[s, a] += beta * (target - updated[s, a])
    return updated


class QLearner:
    """Jogador com rede Q LSTM, memória de replay própria e fluxo de RNG próprio."""

    def __init__(self, actions, net, cfg, rng):
        self.actions = np.asarray(actions, dtype=float)
        if net.n_actions != len(self.actions):
            raise ConfigError(f"rede com {net.n_actions} saídas para {len(self.actions)} ações")
        self.net = net
        self.cfg = cfg
        self.rng = rng
        self.memory = ReplayMemory(cfg.memory_capacity)
        self.target_net = net.copy() if cfg.frozen_target else None
        self.updates = 0

    @classmethod
    def create(cls, actions, input_dim, cfg, rng):
        net = LstmQNet.initialize(input_dim, cfg.hidden_dim, len(actions), rng)
        return cls(actions, net, cfg, rng)

    def act(self, state, eps):
        return select_action(self.net.q_values(state), eps, self.rng)

    def remember(self, experience):
        self.memory.store(experience)

    def train_step(self):
        return train_step(self, self.rng)


def _clip_gradients(grads, max_norm):
    norm = np.sqrt(sum(float(np.sum(g ** 2)) for g in grads.values()))
    if not np.isfinite(norm):
        raise NumericalError("gradiente não finito no passo de treino")
    if max_norm and norm > max_norm:
        for name in grads:
            grads[name] *= max_norm / norm
    return grads


def train_step(learner, rng):
    """
    Um passo de treino: amostra experiências, calcula o erro TD quadrático e aplica descida de gradiente.

    Retorna:
        float | None: Perda média do lote, ou None quando a memória está vazia.
    """
    if not len(learner.memory):
        return None
    cfg, net = learner.cfg, learner.net
    batch = learner.memory.sample(rng, cfg.batch_size)

    total = {name: np.zeros_like(p) for name, p in net.params.items()}
    loss = 0.0
    for exp in batch:
        target = td_target(exp, cfg.gamma, net, learner.target_net, cfg.terminal_cutoff)
        q, cache = net.forward(exp.state)
        error = target - q[exp.action]
        loss += error ** 2
        dq = np.zeros(net.n_actions)
        dq[exp.action] = -2.0 * error / len(batch)
        for name, g in net.backward(cache, dq).items():
            total[name] += g

    net.apply_gradients(_clip_gradients(total, cfg.grad_clip), cfg.beta)
    learner.updates += 1
    if learner.target_net is not None and learner.updates % cfg.target_refresh == 0:
        learner.target_net = net.copy()
    return loss / len(batch)
