"""Adam with the conventional moment hyperparameters (0.9, 0.999, 1e-8)."""

import numpy as np


class Adam:
    def __init__(self, params, learning_rate, beta1=0.9, beta2=0.999, eps=1e-8):
        self.params = list(params)
        self.learning_rate = learning_rate
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self.m = [np.zeros_like(p.value) for p in self.params]
        self.v = [np.zeros_like(p.value) for p in self.params]

    def step(self):
        self.t += 1
        b1, b2 = self.beta1, self.beta2
        bias1 = 1.0 - b1**self.t
        bias2 = 1.0 - b2**self.t
        for p, m, v in zip(self.params, self.m, self.v):
            g = p.grad
            m += (1.0 - b1) * (g - m)
            v += (1.0 - b2) * (g * g - v)
            p.value -= self.learning_rate * (m / bias1) / (np.sqrt(v / bias2) + self.eps)

    def state_arrays(self):
        """Named slots for checkpointing."""
        out = []
        for p, m, v in zip(self.params, self.m, self.v):
            out.append((f"adam.m.{p.name}", m))
            out.append((f"adam.v.{p.name}", v))
        return out

    def load_state(self, arrays: dict, t: int):
        self.t = int(t)
        for p, m, v in zip(self.params, self.m, self.v):
            if f"adam.m.{p.name}" in arrays:
                m[...] = arrays[f"adam.m.{p.name}"]
                v[...] = arrays[f"adam.v.{p.name}"]
