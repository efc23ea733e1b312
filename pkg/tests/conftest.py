import numpy as np
import pytest

from app import create_app
from app.globals import stop_event
from app.process.adversary import scenario
from app.process.game_env import GameEnv, LeaderProcess
from app.process.sensing_fusion import NoiseModel
from app.process.vehicle_dynamics import FollowConfig

ZERO_NOISE = NoiseModel((0.0, 0.0, 0.0, 0.0))


@pytest.fixture
def app():
    return create_app()


@pytest.fixture
def runner(app):
    return app.test_cli_runner()


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def follow():
    return FollowConfig()


@pytest.fixture
def silencioso():
    """Função de log que descarta as mensagens."""
    return lambda mensagem: None


@pytest.fixture(autouse=True)
def limpar_stop_event():
    stop_event.clear()
    yield
    stop_event.clear()


def make_env(scenario_name="none", noise=ZERO_NOISE, steps=1000, engage_delay=3, seed=0, **kwargs):
    return GameEnv(
        FollowConfig(), noise, scenario(scenario_name), leader=LeaderProcess(nu=20.0),
        steps_per_episode=steps, engage_delay=engage_delay, rng=np.random.default_rng(seed), **kwargs,
    )
