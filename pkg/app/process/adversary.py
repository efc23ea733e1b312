from dataclasses import dataclass

import numpy as np

from app.errors import ConfigError, RejectedActionError
from app.globals import SENSORS

# limites por sensor (m/s) na ordem camera, radar, beacon, rss
DEFAULT_TAU = (0.5, 1.0, 1.0, 1.5)
BOUND_TOL = 1e-12

SCENARIO_MASKS = {
    "none": (False, False, False, False),
    "beacon_only": (False, False, True, False),
    "all": (True, True, True, True),
}
SCENARIO_ALIASES = {"beacon": "beacon_only"}


@dataclass(frozen=True)
class AttackScenario:
    name: str
    mask: tuple
    tau: tuple = DEFAULT_TAU

    def __post_init__(self):
        tau = tuple(float(t) for t in self.tau)
        if len(tau) != len(SENSORS) or len(self.mask) != len(SENSORS):
            raise ConfigError("cenário de ataque precisa de 4 limites e 4 flags")
        if any(t < 0 for t in tau):
            raise ConfigError(f"limites de ataque negativos: {tau}")
        object.__setattr__(self, "tau", tau)
        object.__setattr__(self, "mask", tuple(bool(m) for m in self.mask))


def scenario(name, tau=DEFAULT_TAU):
    """Retorna um dos cenários predefinidos: none, beacon_only (ou beacon) e all."""
    key = SCENARIO_ALIASES.get(name, name)
    if key not in SCENARIO_MASKS:
        raise ConfigError(f"cenário desconhecido: {name}")
    return AttackScenario(key, SCENARIO_MASKS[key], tau)


def apply_attack(z, a):
    return np.asarray(z, dtype=float) + np.asarray(a, dtype=float)


def validate_attack(a, attack_scenario, mode="strict"):
    """
    Confere (modo strict) ou projeta (modo clamp) um vetor de injeção no conjunto viável.

    Parâmetros:
        a (array): Injeção bruta, 4 valores (m/s).
        attack_scenario (AttackScenario): Máscara e limites τ.
        mode (str): "strict" rejeita violações, "clamp" limita a [-τ, τ] e zera sensores mascarados.

    Retorna:
        np.ndarray: Vetor de ataque viável.
    """
    a = np.asarray(a, dtype=float)
    tau = np.asarray(attack_scenario.tau)
    mask = np.asarray(attack_scenario.mask)

    if mode == "clamp":
        return np.where(mask, np.clip(a, -tau, tau), 0.0)
    if mode != "strict":
        raise ConfigError(f"attack_mode desconhecido: {mode}")

    for k, sensor in enumerate(SENSORS):
        if not mask[k] and a[k] != 0.0:
            raise RejectedActionError(sensor, f"injeção {a[k]} em sensor fora do cenário '{attack_scenario.name}'")
        if abs(a[k]) > tau[k] + BOUND_TOL:
            raise RejectedActionError(sensor, f"|{a[k]}| excede o limite {tau[k]}")
    return a


def attacked_estimate(z, a, w):
    """Estimativa sob ataque: wᵀ(z + a)."""
    return float(np.asarray(w, dtype=float) @ apply_attack(z, a))
