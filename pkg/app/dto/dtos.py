import hashlib
import json

import numpy as np

from app.errors import ConfigError
from app.globals import DEFAULT_OUT_DIR, SENSORS
from app.process.adversary import DEFAULT_TAU, SCENARIO_ALIASES, SCENARIO_MASKS, scenario
from app.process.game_env import GameEnv, LeaderProcess
from app.process.q_learning import TrainConfig, build_action_grid
from app.process.sensing_fusion import DEFAULT_SIGMA, NoiseModel
from app.process.vehicle_dynamics import FollowConfig

# chave -> (tipo, padrão), na ordem em que aparecem no config.lock
CONFIG_SCHEMA = {
    "scenario": (str, "beacon_only"),
    "lambda": (float, 1.0),
    "T": (float, 0.1),
    "eps_tol": (float, 1e-3),
    "d_min": (float, 2.0),
    "t_h": (float, 1.5),
    "v_max": (float, 40.0),
    "engage_delay": (int, 3),
    "spacing_feedback": (float, 0.0),
    "nu": (float, 20.0),
    "sigma_lead": (float, 0.0),
    **{f"sigma_{s}": (float, v) for s, v in zip(SENSORS, DEFAULT_SIGMA)},
    **{f"tau_{s}": (float, v) for s, v in zip(SENSORS, DEFAULT_TAU)},
    "attack_mode": (str, "strict"),
    "episodes": (int, 30),
    "steps_per_episode": (int, 1000),
    "weight_resolution": (int, 4),
    "attack_levels": (int, 5),
    "window": (int, 0),
    "hidden_dim": (int, 32),
    "beta": (float, 0.01),
    "gamma": (float, 0.5),
    "eps_start": (float, 1.0),
    "eps_end": (float, 0.05),
    "eps_decay": (float, 0.5),
    "explore_mode": (str, "anneal"),
    "batch_size": (int, 1),
    "memory_capacity": (int, 10_000),
    "grad_clip": (float, 10.0),
    "reward_scale": (float, 100.0),
    "utility": (str, "increment"),
    "frozen_target": (bool, False),
    "target_refresh": (int, 1000),
    "terminal_cutoff": (bool, False),
    "plateau_window": (int, 50),
    "plateau_patience": (int, 100),
    "plateau_tol": (float, 0.01),
    "baseline_attacker": (str, "worst"),
    "fp_iterations": (int, 10_000),
    "seed": (int, 0),
    "out": (str, DEFAULT_OUT_DIR),
}

# chaves que determinam as grades de ação e a forma das redes
GRID_KEYS = (
    "scenario", "lambda", "T", "eps_tol", "weight_resolution", "attack_levels", "window", "hidden_dim",
    *(f"tau_{s}" for s in SENSORS),
)

_TRUE = {"1", "true", "yes", "on", "sim"}
_FALSE = {"0", "false", "no", "off", "nao", "não"}


def _converter(chave, valor):
    tipo, _ = CONFIG_SCHEMA[chave]
    if not isinstance(valor, str):
        if tipo is bool and not isinstance(valor, (bool, np.bool_)):
            raise ConfigError(f"{chave}: esperado booleano, recebeu {valor!r}")
        if tipo is int and isinstance(valor, float) and not valor.is_integer():
            raise ConfigError(f"{chave}: esperado inteiro, recebeu {valor!r}")
        return tipo(valor)
    texto = valor.strip()
    try:
        if tipo is bool:
            if texto.lower() in _TRUE:
                return True
            if texto.lower() in _FALSE:
                return False
            raise ValueError(texto)
        return tipo(texto)
    except ValueError:
        raise ConfigError(f"{chave}: valor inválido {valor!r} (esperado {tipo.__name__})") from None


class ExperimentConfig:
    """Configuração resolvida de um experimento; valida todos os módulos na construção."""

    def __init__(self, **valores):
        desconhecidas = sorted(set(valores) - set(CONFIG_SCHEMA))
        if desconhecidas:
            raise ConfigError(f"chaves desconhecidas: {', '.join(desconhecidas)}")
        self.valores = {chave: padrao for chave, (_, padrao) in CONFIG_SCHEMA.items()}
        for chave, valor in valores.items():
            if valor is not None:
                self.valores[chave] = _converter(chave, valor)
        self.valores["scenario"] = SCENARIO_ALIASES.get(self.valores["scenario"], self.valores["scenario"])
        self.validar()

    def __getitem__(self, chave):
        return self.valores[chave]

    def replace(self, **valores):
        return ExperimentConfig(**{**self.valores, **valores})

    def validar(self):
        if self["scenario"] not in SCENARIO_MASKS:
            raise ConfigError(f"scenario: desconhecido {self['scenario']!r} (use none, beacon ou all)")
        if self["attack_mode"] not in ("strict", "clamp"):
            raise ConfigError(f"attack_mode: desconhecido {self['attack_mode']!r}")
        if self["window"] < 0:
            raise ConfigError(f"window = {self['window']} deve ser >= 0 (0 usa n̄)")
        if self["fp_iterations"] < 1:
            raise ConfigError(f"fp_iterations = {self['fp_iterations']} deve ser >= 1")
        if self["seed"] < 0:
            raise ConfigError(f"seed = {self['seed']} deve ser >= 0")
        if self["nu"] < 0 or self["sigma_lead"] < 0:
            raise ConfigError("nu e sigma_lead devem ser >= 0")
        # cada construtor valida as próprias faixas
        self.follow_config()
        self.noise_model()
        self.train_config()
        self.action_grid()
        self.build_env(np.random.default_rng(0))

    def follow_config(self):
        return FollowConfig(
            lam=self["lambda"], T=self["T"], eps_tol=self["eps_tol"],
            d_min=self["d_min"], t_h=self["t_h"], v_max=self["v_max"],
        )

    def noise_model(self):
        return NoiseModel(tuple(self[f"sigma_{s}"] for s in SENSORS), seed=self["seed"])

    def attack_scenario(self):
        return scenario(self["scenario"], tuple(self[f"tau_{s}"] for s in SENSORS))

    def leader(self):
        return LeaderProcess(nu=self["nu"], sigma_lead=self["sigma_lead"])

    @property
    def window(self):
        return self["window"] or self.follow_config().n_bar

    def train_config(self):
        campos = (
            "beta", "gamma", "eps_start", "eps_end", "eps_decay", "explore_mode", "episodes",
            "steps_per_episode", "seed", "hidden_dim", "batch_size", "memory_capacity", "grad_clip",
            "reward_scale", "utility", "frozen_target", "target_refresh", "terminal_cutoff",
            "plateau_window", "plateau_patience", "plateau_tol",
        )
        return TrainConfig(**{campo: self[campo] for campo in campos})

    def action_grid(self):
        return build_action_grid(self.attack_scenario(), self["weight_resolution"], self["attack_levels"])

    def rng_streams(self):
        """Três geradores independentes derivados da semente: ambiente, AV e atacante."""
        return [np.random.default_rng(s) for s in np.random.SeedSequence(self["seed"]).spawn(3)]

    def build_env(self, rng):
        return GameEnv(
            self.follow_config(), self.noise_model(), self.attack_scenario(), leader=self.leader(),
            steps_per_episode=self["steps_per_episode"], window=self.window,
            engage_delay=self["engage_delay"], spacing_feedback=self["spacing_feedback"],
            attack_mode=self["attack_mode"], rng=rng,
        )

    def grid_hash(self):
        chave = {k: self[k] for k in GRID_KEYS}
        chave["window"] = self.window
        texto = json.dumps(chave, sort_keys=True)
        return hashlib.sha256(texto.encode("utf-8")).hexdigest()

    def to_dict(self):
        return dict(self.valores)

    def lock_text(self):
        linhas = [f"{chave}={_formatar(valor)}" for chave, valor in self.valores.items()]
        linhas.append(f"grid_hash={self.grid_hash()}")
        return "\n".join(linhas) + "\n"


def _formatar(valor):
    if isinstance(valor, bool):
        return "true" if valor else "false"
    return repr(float(valor)) if isinstance(valor, float) else str(valor)


class ResumoDTO:
    def __init__(self, comando, scenario, seed, episodes_run, steps, mean_regret_final, mean_regret_first,
                 mean_abs_spacing_dev_final, mean_w_final, collisions, wall_time_s):
        self.comando = comando
        self.scenario = scenario
        self.seed = seed
        self.episodes_run = episodes_run
        self.steps = steps
        self.mean_regret_final = mean_regret_final
        self.mean_regret_first = mean_regret_first
        self.mean_abs_spacing_dev_final = mean_abs_spacing_dev_final
        self.mean_w_final = mean_w_final
        self.collisions = collisions
        self.wall_time_s = wall_time_s

    def to_dict(self):
        return {
            "command": self.comando,
            "scenario": self.scenario,
            "seed": self.seed,
            "episodes_run": self.episodes_run,
            "steps": self.steps,
            "mean_regret_final": self.mean_regret_final,
            "mean_regret_first": self.mean_regret_first,
            "mean_abs_spacing_dev_final": self.mean_abs_spacing_dev_final,
            **{f"mean_w{k + 1}_final": w for k, w in enumerate(self.mean_w_final)},
            "collisions": self.collisions,
            "wall_time_s": self.wall_time_s,
        }

    def to_text(self):
        return "".join(f"{chave}={_formatar(valor)}\n" for chave, valor in self.to_dict().items())
