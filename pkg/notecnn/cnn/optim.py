from typing import Dict, Iterable

import numpy as np
from attrs import define, field


@define(eq=False)
class Adam:
    """Adaptive moment estimation over a named parameter dict, updated in place."""

    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    # parameter names left untouched (e.g. a frozen embedding)
    frozen: Iterable[str] = field(factory=tuple, converter=frozenset)
    t: int = 0
    _m: Dict[str, np.ndarray] = field(factory=dict)
    _v: Dict[str, np.ndarray] = field(factory=dict)

    def step(self, params: Dict[str, np.ndarray], grads: Dict[str, np.ndarray]) -> None:
        self.t += 1
        correction1 = 1.0 - self.beta1**self.t
        correction2 = 1.0 - self.beta2**self.t
        for name, value in params.items():
            if name in self.frozen:
                continue
            grad = grads[name]
            m = self._m.get(name)
            if m is None:
                m = self._m[name] = np.zeros_like(value)
                self._v[name] = np.zeros_like(value)
            v = self._v[name]
            m *= self.beta1
            m += (1.0 - self.beta1) * grad
            v *= self.beta2
            v += (1.0 - self.beta2) * grad * grad
            value -= self.learning_rate * (m / correction1) / (np.sqrt(v / correction2) + self.epsilon)

