import numpy as np

from app.errors import ContractError, NumericalError

# Blocos de porta empilhados nas colunas de Wx, Wh e b, nesta ordem
GATES = ("input", "forget", "output", "candidate")
LSTM_PARAMS = ("Wx", "Wh", "b")
HEAD_PARAMS = ("Wq", "bq")


def _sigmoid(x):
    return 0.5 * (1.0 + np.tanh(0.5 * x))


def _forward_cache(seq, params):
    seq = np.asarray(seq, dtype=float)
    Wx, Wh, b = params["Wx"], params["Wh"], params["b"]
    if seq.ndim != 2 or seq.shape[1] != Wx.shape[0]:
        raise ContractError(f"sequência com forma {seq.shape}; esperado (n, {Wx.shape[0]})")
    H = Wh.shape[0]
    steps = seq.shape[0]

    xw = seq @ Wx + b
    gates = np.empty((steps, 4 * H))
    cells = np.empty((steps + 1, H))
    hiddens = np.empty((steps + 1, H))
    cells[0] = 0.0
    hiddens[0] = 0.0
    for t in range(steps):
        z = xw[t] + hiddens[t] @ Wh
        gates[t, :3 * H] = _sigmoid(z[:3 * H])
        gates[t, 3 * H:] = np.tanh(z[3 * H:])
        i, f, o, g = gates[t, :H], gates[t, H:2 * H], gates[t, 2 * H:3 * H], gates[t, 3 * H:]
        cells[t + 1] = f * cells[t] + i * g
        hiddens[t + 1] = o * np.tanh(cells[t + 1])
    return {"seq": seq, "gates": gates, "cells": cells, "hiddens": hiddens}


def lstm_forward(seq, params):
    """
    Passa a sequência pela LSTM (estado oculto e célula iniciados em zero).

    Parâmetros:
        seq (np.ndarray): Sequência n̂ × input_dim.
        params (dict): Wx (input_dim × 4H), Wh (H × 4H), b (4H).

    Retorna:
        np.ndarray: Estado oculto final (H).
    """
    return _forward_cache(seq, params)["hiddens"][-1].copy()


def _backward_cache(cache, params, dh_final):
    Wh = params["Wh"]
    H = Wh.shape[0]
    gates, cells, hiddens = cache["gates"], cache["cells"], cache["hiddens"]
    steps = gates.shape[0]

    dz = np.empty_like(gates)
    dh = np.asarray(dh_final, dtype=float).copy()
    dc = np.zeros(H)
    for t in reversed(range(steps)):
        i, f, o, g = gates[t, :H], gates[t, H:2 * H], gates[t, 2 * H:3 * H], gates[t, 3 * H:]
        tanh_c = np.tanh(cells[t + 1])
        dc = dc + dh * o * (1.0 - tanh_c ** 2)
        dz[t, :H] = dc * g * i * (1.0 - i)
        dz[t, H:2 * H] = dc * cells[t] * f * (1.0 - f)
        dz[t, 2 * H:3 * H] = dh * tanh_c * o * (1.0 - o)
        dz[t, 3 * H:] = dc * i * (1.0 - g ** 2)
        dh = dz[t] @ Wh.T
        dc = dc * f

    return {
        "Wx": cache["seq"].T @ dz,
        "Wh": hiddens[:-1].T @ dz,
        "b": dz.sum(axis=0),
    }


def lstm_backward(seq, params, output_gradient):
    """
    Retropropagação no tempo (BPTT) a partir do gradiente do estado oculto final.

    Retorna:
        dict: Gradientes de Wx, Wh e b.
    """
    return _backward_cache(_forward_cache(seq, params), params, output_gradient)


class LstmQNet:
    """LSTM de uma camada seguida de uma cabeça afim hidden → |ações| valores Q."""

    PARAM_NAMES = LSTM_PARAMS + HEAD_PARAMS

    def __init__(self, params):
        self.params = {name: np.asarray(params[name], dtype=float) for name in self.PARAM_NAMES}
        D, H4 = self.params["Wx"].shape
        H = H4 // 4
        A = self.params["bq"].shape[0]
        expected = {"Wx": (D, 4 * H), "Wh": (H, 4 * H), "b": (4 * H,), "Wq": (H, A), "bq": (A,)}
        for name, shape in expected.items():
            if self.params[name].shape != shape:
                raise ContractError(f"parâmetro {name} com forma {self.params[name].shape}; esperado {shape}")

    @classmethod
    def initialize(cls, input_dim, hidden_dim, n_actions, rng):
        bound = 1.0 / np.sqrt(hidden_dim)
        b = np.zeros(4 * hidden_dim)
        b[hidden_dim:2 * hidden_dim] = 1.0
        return cls({
            "Wx": rng.uniform(-bound, bound, (input_dim, 4 * hidden_dim)),
            "Wh": rng.uniform(-bound, bound, (hidden_dim, 4 * hidden_dim)),
            "b": b,
            # cabeça zerada: no início Q(s, ·) = bq para qualquer estado
            "Wq": np.zeros((hidden_dim, n_actions)),
            "bq": np.zeros(n_actions),
        })

    @classmethod
    def zeros(cls, input_dim, hidden_dim, n_actions):
        return cls({
            "Wx": np.zeros((input_dim, 4 * hidden_dim)),
            "Wh": np.zeros((hidden_dim, 4 * hidden_dim)),
            "b": np.zeros(4 * hidden_dim),
            "Wq": np.zeros((hidden_dim, n_actions)),
            "bq": np.zeros(n_actions),
        })

    @property
    def input_dim(self):
        return self.params["Wx"].shape[0]

    @property
    def hidden_dim(self):
        return self.params["Wh"].shape[0]

    @property
    def n_actions(self):
        return self.params["bq"].shape[0]

    def forward(self, seq):
        cache = _forward_cache(seq, self.params)
        q = cache["hiddens"][-1] @ self.params["Wq"] + self.params["bq"]
        return q, cache

    def q_values(self, seq):
        return self.forward(seq)[0]

    def backward(self, cache, dq):
        h = cache["hiddens"][-1]
        grads = _backward_cache(cache, self.params, self.params["Wq"] @ dq)
        grads["Wq"] = np.outer(h, dq)
        grads["bq"] = np.asarray(dq, dtype=float).copy()
        return grads

    def apply_gradients(self, grads, lr):
        for name in self.PARAM_NAMES:
            self.params[name] -= lr * grads[name]
        if not self.is_finite():
            raise NumericalError("parâmetros da rede Q deixaram de ser finitos")

    def is_finite(self):
        return all(np.all(np.isfinite(p)) for p in self.params.values())

    def copy(self):
        return LstmQNet({name: p.copy() for name, p in self.params.items()})


def q_values(obs, net):
    """Valores Q de uma observação (PlayerObservation ou matriz de features)."""
    seq = obs.features() if hasattr(obs, "features") else obs
    return net.q_values(seq)
