"""Dense float64 tensors and named parameter sets.

Tensors are plain numpy float64 arrays; every kernel op validates that its
outputs stay finite. ``ParamSet`` pairs each named parameter with a
gradient accumulator of identical shape.
"""

from __future__ import annotations

from typing import Iterable, Iterator

import numpy as np

from ..errors import IntegrityError, NumericError, ShapeError

Tensor = np.ndarray


def as_tensor(data, shape: Iterable[int] | None = None) -> Tensor:
    """Coerce to a finite float64 array, optionally reshaped."""
    arr = np.asarray(data, dtype=np.float64)
    if shape is not None:
        arr = arr.reshape(tuple(shape))
    check_finite(arr, "tensor")
    return arr


def check_finite(arr: Tensor, what: str) -> Tensor:
    if not np.all(np.isfinite(arr)):
        raise NumericError(f"{what} contains non-finite values")
    return arr


def require_shape(arr: Tensor, shape: tuple[int, ...], what: str) -> Tensor:
    if arr.shape != shape:
        raise ShapeError(f"{what}: expected shape {shape}, got {arr.shape}")
    return arr


class ParamSet:
    """Named parameters with matching gradient accumulators.

    Gradient arrays are allocated alongside each parameter and mutated in
    place, so views built with :meth:`union` stay live.
    """

    def __init__(self):
        self._values: dict[str, Tensor] = {}
        self._grads: dict[str, Tensor] = {}

    def add(self, name: str, value) -> Tensor:
        if name in self._values:
            raise IntegrityError(f"duplicate parameter name: {name}")
        arr = as_tensor(value)
        self._values[name] = arr
        self._grads[name] = np.zeros_like(arr)
        return arr

    def __contains__(self, name: str) -> bool:
        return name in self._values

    def __getitem__(self, name: str) -> Tensor:
        return self._values[name]

    def __len__(self) -> int:
        return len(self._values)

    def names(self) -> list[str]:
        return list(self._values)

    def items(self) -> Iterator[tuple[str, Tensor]]:
        return iter(self._values.items())

    def grad(self, name: str) -> Tensor:
        return self._grads[name]

    def add_grad(self, name: str, g) -> None:
        acc = self._grads[name]
        g = np.asarray(g, dtype=np.float64)
        if g.shape != acc.shape:
            raise ShapeError(
                f"gradient for {name}: expected shape {acc.shape}, got {g.shape}"
            )
        acc += g

    def zero_grads(self) -> None:
        for g in self._grads.values():
            g[...] = 0.0

    def scale_grads(self, factor: float) -> None:
        for g in self._grads.values():
            g *= factor

    def n_elements(self) -> int:
        return sum(int(v.size) for v in self._values.values())

    def copy(self) -> "ParamSet":
        out = ParamSet()
        for name, value in self._values.items():
            out.add(name, value.copy())
            out._grads[name][...] = self._grads[name]
        return out

    def load_values(self, other: "ParamSet") -> None:
        """Copy values from ``other`` in place; names and shapes must match."""
        if set(other.names()) != set(self.names()):
            missing = set(self.names()) ^ set(other.names())
            raise IntegrityError(f"parameter name mismatch: {sorted(missing)}")
        for name, value in other.items():
            target = self._values[name]
            require_shape(value, target.shape, name)
            target[...] = value

    @staticmethod
    def union(*groups: tuple[str, "ParamSet"]) -> "ParamSet":
        """Prefixed view over several sets sharing the underlying arrays."""
        out = ParamSet()
        for prefix, ps in groups:
            for name in ps.names():
                full = f"{prefix}.{name}" if prefix else name
                if full in out._values:
                    raise IntegrityError(f"duplicate parameter name: {full}")
                out._values[full] = ps._values[name]
                out._grads[full] = ps._grads[name]
        return out
