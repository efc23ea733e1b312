import logging
from dataclasses import dataclass, field

import numpy as np

from app.errors import ConfigError, LifecycleError
from app.globals import SENSORS
from app.process.adversary import apply_attack, validate_attack
from app.process.sensing_fusion import check_simplex, fused_estimate, measure
from app.process.vehicle_dynamics import (
    VehicleState,
    discrete_speed_update,
    initial_spacing,
    safe_spacing,
    spacing_update,
)

logger = logging.getLogger(__name__)

# ação própria (4 componentes) + desvio relativo
FEATURE_DIM = len(SENSORS) + 1


@dataclass(frozen=True)
class DeviationState:
    delta: float = 0.0
    # termos wᵀe + wᵀa anteriores, do mais novo para o mais antigo (no máximo n̄)
    terms: tuple = ()
    n: int = 0


@dataclass(frozen=True)
class LeaderProcess:
    nu: float = 20.0
    sigma_lead: float = 0.0

    def draw(self, rng, v_max):
        return float(np.clip(rng.normal(self.nu, self.sigma_lead), 0.0, v_max))


@dataclass(frozen=True, eq=False)
class PlayerObservation:
    own_actions: np.ndarray
    deviations: np.ndarray
    feature_scale: float = 1.0

    def features(self):
        """Sequência (n̂ × 5) de entrada da LSTM: ação própria + desvio relativo."""
        return np.column_stack([self.own_actions, self.deviations * self.feature_scale])

    def rotate(self, action, delta):
        return PlayerObservation(
            np.vstack([self.own_actions[1:], np.asarray(action, dtype=float)[None, :]]),
            np.append(self.deviations[1:], delta),
            self.feature_scale,
        )


@dataclass(frozen=True, eq=False)
class StepOutcome:
    regret: float
    stage_regret: float
    u_av: float
    u_att: float
    delta: float
    spacing: float
    spacing_dev: float
    collision: bool
    done: bool
    term: float
    estimate: float
    v: float
    v_lead: float
    w: np.ndarray = field(repr=False)
    a: np.ndarray = field(repr=False)


def theta(terms, q):
    """θ = Σ_l q^l · term(n - l) para termos ordenados do mais novo para o mais antigo."""
    terms = np.asarray(terms, dtype=float)
    return float((q ** np.arange(terms.size)) @ terms)


def deviation_step(prev, new_term, cfg):
    """Recursão do desvio: δ(n) = δ(n-1) + θ(n), com o buffer rotacionado."""
    window = (float(new_term),) + prev.terms[:cfg.n_bar]
    return DeviationState(prev.delta + theta(window, cfg.q), window[:cfg.n_bar], prev.n + 1)


def deviation_direct(term_history, cfg):
    """Soma dupla literal do desvio sobre o histórico completo (mais antigo primeiro). O(n·n̄)."""
    h = [float(t) for t in term_history]
    total = 0.0
    for p in range(len(h)):
        for l in range(min(cfg.n_bar, p) + 1):
            total += cfg.q ** l * h[p - l]
    return total


def regret(delta, cfg):
    """R = λ²T⁴δ² (m²). Aceita um DeviationState ou o valor de δ."""
    delta = getattr(delta, "delta", delta)
    return cfg.lam ** 2 * cfg.T ** 4 * delta ** 2


def stage_regret(increment, cfg):
    """Regret do passo isolado: λ²T⁴θ(n)², com θ(n) = δ(n) - δ(n-1)."""
    return cfg.lam ** 2 * cfg.T ** 4 * increment ** 2


def spacing_deviation(delta, cfg):
    """Desvio de espaçamento em metros: λT²|δ|."""
    delta = getattr(delta, "delta", delta)
    return cfg.lam * cfg.T ** 2 * abs(delta)


class GameEnv:
    """
    Jogo repetido de soma zero entre o AV (pesos de fusão) e o atacante (injeções).

    O seguidor parte do repouso em d*(ν) e engata o laço de velocidade após
    `engage_delay` amostras; com engage_delay=0 parte em cruzeiro (v = ν, d = o(ν)).
    """

    def __init__(self, follow, noise, attack_scenario, leader=None, steps_per_episode=1000,
                 window=None, engage_delay=3, spacing_feedback=0.0, attack_mode="strict", rng=None):
        if steps_per_episode < 1:
            raise ConfigError(f"steps_per_episode = {steps_per_episode} deve ser >= 1")
        if engage_delay < 0:
            raise ConfigError(f"engage_delay = {engage_delay} deve ser >= 0")
        self.follow = follow
        self.noise = noise
        self.scenario = attack_scenario
        self.leader = leader or LeaderProcess()
        if not 0.0 <= self.leader.nu <= follow.v_max:
            raise ConfigError(f"nu = {self.leader.nu} fora de [0, v_max]")
        self.steps_per_episode = steps_per_episode
        self.window = window or follow.n_bar
        self.engage_delay = engage_delay
        self.spacing_feedback = spacing_feedback
        self.attack_mode = attack_mode
        self.rng = rng if rng is not None else noise.rng()
        self.done = True

    @property
    def target_spacing(self):
        return safe_spacing(self.leader.nu, self.follow)

    def _empty_observation(self):
        scale = self.follow.lam * self.follow.T ** 2 / max(self.target_spacing, 1e-9)
        return PlayerObservation(np.zeros((self.window, len(SENSORS))), np.zeros(self.window), scale)

    def reset(self, leader=None):
        """Inicia um episódio e devolve as observações iniciais (AV, atacante)."""
        if leader is not None:
            self.leader = leader
        nu = self.leader.nu
        if self.engage_delay > 0:
            self.state = VehicleState(v=0.0, v_lead=nu, d=initial_spacing(nu, self.follow))
        else:
            self.state = VehicleState(v=nu, v_lead=nu, d=self.target_spacing)
        self.deviation = DeviationState()
        self.obs_av = self._empty_observation()
        self.obs_att = self._empty_observation()
        self.done = False
        return self.obs_av, self.obs_att

    def step(self, w, a, rng=None):
        if self.done:
            raise LifecycleError("episódio encerrado; chame reset() antes de env_step")
        rng = self.rng if rng is None else rng
        cfg = self.follow
        w = check_simplex(w)
        a = validate_attack(a, self.scenario, self.attack_mode)

        v_lead = self.leader.draw(rng, cfg.v_max)
        z = measure(v_lead, self.noise, rng)
        estimate = fused_estimate(apply_attack(z, a), w)

        state = self.state
        if state.n >= self.engage_delay:
            target = estimate + self.spacing_feedback * (state.d - self.target_spacing)
            v = discrete_speed_update(state.v, target, cfg)
            term = float(w @ (z - v_lead) + w @ a)
        else:
            # seguidor ainda parado: a estimativa não chega ao controle
            v = state.v
            term = 0.0
        d = spacing_update(state.d, v_lead, v, cfg.T)
        self.state = VehicleState(v=v, v_lead=v_lead, d=d, n=state.n + 1)

        previous = self.deviation.delta
        self.deviation = deviation_step(self.deviation, term, cfg)
        delta = self.deviation.delta
        r = regret(delta, cfg)

        self.obs_av = self.obs_av.rotate(w, delta)
        self.obs_att = self.obs_att.rotate(a, delta)

        collision = self.state.collided
        if collision:
            logger.warning("colisão no passo %d: espaçamento %.3f m", self.state.n, d)
        self.done = collision or self.state.n >= self.steps_per_episode

        outcome = StepOutcome(
            regret=r, stage_regret=stage_regret(delta - previous, cfg), u_av=-r, u_att=r,
            delta=delta, spacing=d, spacing_dev=spacing_deviation(delta, cfg), collision=collision,
            done=self.done, term=term, estimate=estimate, v=v, v_lead=v_lead, w=w, a=a,
        )
        return outcome, self.obs_av, self.obs_att


def reset(env, leader=None):
    return env.reset(leader)


def env_step(env, w, a, rng=None):
    return env.step(w, a, rng)


class MatrixGameEnv:
    """
    Rig sem estado para jogos de matriz (ex.: matching pennies) com a mesma interface do GameEnv.

    As ações são vetores one-hot; o payoff da matriz é a utilidade do atacante (coluna).
    """

    def __init__(self, payoff, steps_per_episode=100, window=1):
        self.payoff = np.asarray(payoff, dtype=float)
        self.steps_per_episode = steps_per_episode
        self.window = window
        self.done = True

    def _empty(self, dim):
        return PlayerObservation(np.zeros((self.window, dim)), np.zeros(self.window), 0.0)

    def reset(self, leader=None):
        self.n = 0
        self.obs_av = self._empty(self.payoff.shape[0])
        self.obs_att = self._empty(self.payoff.shape[1])
        self.done = False
        return self.obs_av, self.obs_att

    def step(self, w, a, rng=None):
        if self.done:
            raise LifecycleError("episódio encerrado; chame reset() antes de env_step")
        i, j = int(np.argmax(w)), int(np.argmax(a))
        gain = float(self.payoff[i, j])
        self.n += 1
        self.done = self.n >= self.steps_per_episode
        outcome = StepOutcome(
            regret=gain, stage_regret=gain, u_av=-gain, u_att=gain, delta=0.0, spacing=0.0, spacing_dev=0.0,
            collision=False, done=self.done, term=0.0, estimate=0.0, v=0.0, v_lead=0.0,
            w=np.asarray(w, dtype=float), a=np.asarray(a, dtype=float),
        )
        return outcome, self.obs_av, self.obs_att
