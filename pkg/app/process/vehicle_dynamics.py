import logging
import math
from dataclasses import dataclass, field

import numpy as np

from app.errors import ConfigError, ContractError

logger = logging.getLogger(__name__)


def compute_history_depth(lam, T, eps_tol):
    """
    Calcula a profundidade de histórico n̄: o menor inteiro n com |1 - λT|^n <= eps_tol.

    Parâmetros:
        lam (float): Parâmetro de reação (1/s).
        T (float): Período de amostragem (s).
        eps_tol (float): Tolerância de truncamento, em (0, 1).

    Retorna:
        int: Número de passos de histórico relevantes.
    """
    lam_t = lam * T
    if not 0.0 < lam_t < 2.0:
        raise ConfigError(f"estabilidade violada: lambda*T = {lam_t} fora de (0, 2)")
    if not 0.0 < eps_tol < 1.0:
        raise ConfigError(f"eps_tol = {eps_tol} fora de (0, 1)")

    q = abs(1.0 - lam_t)
    if q == 0.0:
        return 1

    n = max(1, math.ceil(math.log(eps_tol) / math.log(q)))
    # corrige o arredondamento do log nas bordas
    while n > 1 and q ** (n - 1) <= eps_tol:
        n -= 1
    while q ** n > eps_tol:
        n += 1
    return n


@dataclass(frozen=True)
class FollowConfig:
    lam: float = 1.0
    T: float = 0.1
    eps_tol: float = 1e-3
    d_min: float = 2.0
    t_h: float = 1.5
    v_max: float = 40.0
    n_bar: int = field(init=False)

    def __post_init__(self):
        if self.T <= 0:
            raise ConfigError(f"T = {self.T} deve ser positivo")
        if self.d_min < 0:
            raise ConfigError(f"d_min = {self.d_min} deve ser >= 0")
        if self.t_h <= 0:
            raise ConfigError(f"t_h = {self.t_h} deve ser positivo")
        if self.v_max <= 0:
            raise ConfigError(f"v_max = {self.v_max} deve ser positivo")
        object.__setattr__(self, "n_bar", compute_history_depth(self.lam, self.T, self.eps_tol))

    @property
    def lam_t(self):
        return self.lam * self.T

    @property
    def q(self):
        return 1.0 - self.lam * self.T


@dataclass(frozen=True)
class VehicleState:
    v: float
    v_lead: float
    d: float
    n: int = 0

    @property
    def collided(self):
        return self.d <= 0.0


def discrete_speed_update(v, v_lead_est, cfg):
    """Passo discreto do modelo GM: v' = λT·v̂ + (1 - λT)·v, limitado a [0, v_max]."""
    v_next = cfg.lam_t * v_lead_est + cfg.q * v
    if v_next < 0.0 or v_next > cfg.v_max:
        logger.debug("velocidade %.4f limitada a [0, %.1f]", v_next, cfg.v_max)
        v_next = min(max(v_next, 0.0), cfg.v_max)
    return v_next


def truncated_speed(est_history, cfg):
    """
    Velocidade do seguidor pela soma truncada em n̄ passos.

    Parâmetros:
        est_history (sequence): n̄ + 1 estimativas da velocidade do líder, da mais nova para a mais antiga.
        cfg (FollowConfig): Constantes da dinâmica.

    Retorna:
        float: Σ λT(1 - λT)^l · est_history[l].
    """
    est = np.asarray(est_history, dtype=float)
    if est.shape != (cfg.n_bar + 1,):
        raise ContractError(
            f"histórico com {est.size} estimativas; esperado n_bar + 1 = {cfg.n_bar + 1}"
        )
    weights = cfg.lam_t * cfg.q ** np.arange(cfg.n_bar + 1)
    return float(weights @ est)


def spacing_update(d, v_lead_next, v_next, T):
    return d + T * (v_lead_next - v_next)


def safe_spacing(nu, cfg):
    """Espaçamento seguro ótimo o(ν) com headway constante."""
    return cfg.d_min + cfg.t_h * nu


def initial_spacing(nu, cfg):
    """
    Espaçamento de partida d*(ν) a partir do qual o seguidor converge para o(ν).

    Parâmetros:
        nu (float): Velocidade média do líder (m/s).
        cfg (FollowConfig): Constantes da dinâmica.

    Retorna:
        float: o(ν) - (n̄ + 2)Tν + Tν Σ_{p<n̄} (1 - (1 - λT)^p). Pode ser negativo.
    """
    n_bar = cfg.n_bar
    tail = np.sum(1.0 - cfg.q ** np.arange(n_bar))
    d_star = safe_spacing(nu, cfg) - (n_bar + 2) * cfg.T * nu + cfg.T * nu * tail
    if d_star < 0:
        logger.warning("warm start inviável: d*(%.2f) = %.3f m < 0", nu, d_star)
    return float(d_star)
