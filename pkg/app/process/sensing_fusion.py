import logging
from dataclasses import dataclass

import numpy as np

from app.errors import ContractError
from app.globals import SENSORS

logger = logging.getLogger(__name__)

# σ padrão (m/s) na ordem camera, radar, beacon, rss
DEFAULT_SIGMA = (0.2, 0.4, 0.05, 0.8)
SIMPLEX_TOL = 1e-9


@dataclass(frozen=True)
class NoiseModel:
    sigma: tuple = DEFAULT_SIGMA
    seed: int = 0

    def __post_init__(self):
        sigma = tuple(float(s) for s in self.sigma)
        if len(sigma) != len(SENSORS):
            raise ContractError(f"sigma precisa de {len(SENSORS)} valores, recebeu {len(sigma)}")
        if any(s < 0 or not np.isfinite(s) for s in sigma):
            raise ContractError(f"sigma inválido: {sigma}")
        object.__setattr__(self, "sigma", sigma)
        camera, radar, beacon, rss = sigma
        if not rss >= radar >= camera >= beacon:
            logger.warning("perfil de ruído fora da ordem rss >= radar >= camera >= beacon: %s", sigma)

    @property
    def variances(self):
        return np.asarray(self.sigma) ** 2

    def rng(self):
        return np.random.default_rng(self.seed)


def measure(v_lead, noise, rng, h=None):
    """
    Gera a leitura dos quatro sensores: z_k = h_k·v_lead + e_k, e_k ~ N(0, σ_k²).

    Os sorteios consomem o gerador do chamador na ordem camera, radar, beacon, rss.
    """
    h = np.ones(len(SENSORS)) if h is None else np.asarray(h, dtype=float)
    e = rng.normal(0.0, noise.sigma)
    return h * v_lead + e


def _check_jacobian(h):
    h = np.asarray(h, dtype=float)
    if h.shape != (len(SENSORS),) or not np.any(h):
        raise ContractError(f"jacobiano de medição degenerado: {h}")
    return h


def wls_estimate(z, h, W):
    """
    Estimativa por mínimos quadrados ponderados: (hᵀWh)⁻¹ hᵀW z.

    Parâmetros:
        z (array): Vetor de sensores.
        h (array): Jacobiano de medição (4 coeficientes, não todos nulos).
        W (array): Diagonal de pesos não negativos.

    Retorna:
        float: Velocidade estimada do líder.
    """
    h = _check_jacobian(h)
    W = np.asarray(W, dtype=float)
    if np.any(W < 0):
        raise ContractError(f"pesos W negativos: {W}")
    gain = h @ (W * h)
    if gain <= 0:
        raise ContractError("hᵀWh nulo: nenhum sensor com peso e coeficiente ativos")
    return float(h @ (W * np.asarray(z, dtype=float)) / gain)


def check_simplex(w):
    w = np.asarray(w, dtype=float)
    if w.shape != (len(SENSORS),) or np.any(w < 0) or abs(w.sum() - 1.0) > SIMPLEX_TOL:
        raise ContractError(f"pesos fora do simplex: {w}")
    return w


def fused_estimate(z, w):
    return float(check_simplex(w) @ np.asarray(z, dtype=float))


def residual_cost(z, z_hat, W):
    r = np.asarray(z, dtype=float) - np.asarray(z_hat, dtype=float)
    return float(r @ (np.asarray(W, dtype=float) * r))


def inverse_variance_weights(noise):
    """
    Pesos estáticos da fusão de variância inversa (equivalente ao Kalman em regime).

    Retorna:
        np.ndarray: w_k = (1/σ_k²) / Σ_j (1/σ_j²); um sensor sem ruído recebe todo o peso.
    """
    sigma = np.asarray(noise.sigma, dtype=float)
    zeros = np.flatnonzero(sigma == 0.0)
    if zeros.size:
        w = np.zeros_like(sigma)
        w[zeros[0]] = 1.0
        return w
    precision = 1.0 / sigma ** 2
    return precision / precision.sum()
