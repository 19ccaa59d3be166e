# Area: Diffcore
# PRD: docs/prd-bonecloth.md
"""
bonecloth._diffcore.params — Named parameter store
==================================================

Parameters are leaf Tensors registered under dotted ``module.layer.kind``
names. Initial values come from one generator (the ``init`` stream) and
are drawn in registration order, so a model built twice from the same
seed is bitwise identical.
"""

from __future__ import annotations

import logging
from typing import Dict, Iterator, List, Optional, Tuple

import numpy as np

from ..errors import ShapeMismatchError
from .tape import Tensor, current_dtype

logger = logging.getLogger("bonecloth.diffcore")


def kaiming_uniform(rng: np.random.Generator, shape: Tuple[int, ...], fan_in: int) -> np.ndarray:
    """Uniform in ±sqrt(6 / fan_in)."""
    bound = np.sqrt(6.0 / max(fan_in, 1))
    return rng.uniform(-bound, bound, size=shape)


class ParamStore:
    """Ordered collection of trainable leaf tensors."""

    def __init__(self, rng: np.random.Generator):
        self._rng = rng
        self._params: Dict[str, Tensor] = {}

    def __contains__(self, name: str) -> bool:
        return name in self._params

    def __getitem__(self, name: str) -> Tensor:
        return self._params[name]

    def __iter__(self) -> Iterator[str]:
        return iter(self._params)

    def __len__(self) -> int:
        return len(self._params)

    def items(self):
        return self._params.items()

    def names(self, prefix: str = "") -> List[str]:
        return [n for n in self._params if n.startswith(prefix)]

    def subset(self, prefixes: Tuple[str, ...]) -> Dict[str, Tensor]:
        return {n: t for n, t in self._params.items() if n.startswith(prefixes)}

    def _register(self, name: str, data: np.ndarray) -> Tensor:
        if name in self._params:
            raise ValueError(f"Parameter '{name}' registered twice")
        tensor = Tensor(data, requires_grad=True, name=name)
        self._params[name] = tensor
        return tensor

    def kaiming(self, name: str, shape: Tuple[int, ...], fan_in: int) -> Tensor:
        return self._register(name, kaiming_uniform(self._rng, shape, fan_in))

    def zeros(self, name: str, shape: Tuple[int, ...]) -> Tensor:
        return self._register(name, np.zeros(shape))

    def constant(self, name: str, shape: Tuple[int, ...], value: float) -> Tensor:
        return self._register(name, np.full(shape, value))

    def zero_grad(self) -> None:
        for tensor in self._params.values():
            tensor.grad = None

    def state_dict(self) -> Dict[str, np.ndarray]:
        return {name: t.data.copy() for name, t in self._params.items()}

    def load_state_dict(self, arrays: Dict[str, np.ndarray], strict: bool = True) -> None:
        """Copy *arrays* into the registered parameters, checking shapes."""
        for name, tensor in self._params.items():
            if name not in arrays:
                if strict:
                    raise KeyError(f"missing parameter '{name}'")
                continue
            value = arrays[name]
            if tuple(value.shape) != tensor.shape:
                raise ShapeMismatchError("load_state_dict", [tensor.shape, value.shape], name)
            tensor.data = np.array(value, dtype=current_dtype())
        logger.debug(f"Loaded {len(self._params)} parameters")

    def count(self, prefix: Optional[str] = None) -> int:
        return int(sum(t.data.size for n, t in self._params.items() if prefix is None or n.startswith(prefix)))
