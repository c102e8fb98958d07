"""The Hilbert module ``H = A^k`` over a block-matrix algebra.

An element ``x = (x_1, ..., x_k)`` is stored per algebra block ``j`` as the
stacked ``(k*n_j) x n_j`` matrix ``X_j = [x_1; ...; x_k]``, so the module
inner product ``<x, y> = sum_i x_i^* y_i`` is the single product ``X_j^* Y_j``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .calg import AlgebraElement, AlgebraSignature, _frozen


class DegenerateInputError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class Frame:
    signature: AlgebraSignature
    k: int
    blocks: tuple[np.ndarray, ...]

    def __post_init__(self):
        sig = AlgebraSignature.of(self.signature)
        k = int(self.k)
        if k < 1:
            raise ValueError("k must be positive")
        blocks = tuple(_frozen(b) for b in self.blocks)
        if len(blocks) != len(sig):
            raise ValueError(f"expected {len(sig)} blocks, got {len(blocks)}")
        for n, b in zip(sig, blocks):
            if b.shape != (k * n, n):
                raise ValueError(f"frame block of shape {b.shape}, expected {(k * n, n)}")
        object.__setattr__(self, "signature", sig)
        object.__setattr__(self, "k", k)
        object.__setattr__(self, "blocks", blocks)

    def __add__(self, other: "Frame") -> "Frame":
        _check_conform(self, other)
        return Frame(self.signature, self.k, tuple(a + b for a, b in zip(self.blocks, other.blocks)))

    def __mul__(self, s) -> "Frame":
        """Right module action ``x . s`` for an algebra element or a scalar."""
        if isinstance(s, AlgebraElement):
            if s.signature != self.signature:
                raise ValueError("signature mismatch")
            return Frame(self.signature, self.k, tuple(x @ b for x, b in zip(self.blocks, s.blocks)))
        return Frame(self.signature, self.k, tuple(x * complex(s) for x in self.blocks))

    def __rmul__(self, s) -> "Frame":
        return self * s

    def component(self, i: int) -> AlgebraElement:
        """The ``i``-th module coordinate ``x_i`` as an algebra element."""
        return AlgebraElement(
            self.signature, tuple(b[i * n:(i + 1) * n] for n, b in zip(self.signature, self.blocks))
        )


def _check_conform(x: Frame, y: Frame):
    if x.signature != y.signature or x.k != y.k:
        raise ValueError(
            f"frame shape mismatch: sig {x.signature.to_list()} k={x.k} vs "
            f"sig {y.signature.to_list()} k={y.k}"
        )


def inner_product(x: Frame, y: Frame) -> AlgebraElement:
    """``<x, y>``, conjugate-linear in ``x``, linear in ``y``."""
    _check_conform(x, y)
    return AlgebraElement(x.signature, tuple(a.conj().T @ b for a, b in zip(x.blocks, y.blocks)))


def vec_norm(x: Frame) -> float:
    """``sqrt(||<x, x>||)``, i.e. the largest singular value over blocks."""
    return max(float(np.linalg.norm(b, 2)) for b in x.blocks)


def normalize(x: Frame) -> Frame:
    nrm = vec_norm(x)
    if nrm == 0 or not np.isfinite(nrm):
        raise DegenerateInputError("cannot normalize a zero (or non-finite) frame")
    return Frame(x.signature, x.k, tuple(b / nrm for b in x.blocks))


def zero_frame(sig, k: int) -> Frame:
    sig = AlgebraSignature.of(sig)
    return Frame(sig, k, tuple(np.zeros((k * n, n)) for n in sig))


def identity_frame(sig, k: int = 1) -> Frame:
    """The unit ``e`` in the first module slot, zeros elsewhere."""
    sig = AlgebraSignature.of(sig)
    return Frame(sig, k, tuple(np.eye(k * n, n) for n in sig))


def random_frame(sig, k: int = 1, seed=None) -> Frame:
    """Complex Gaussian frame scaled to unit norm; deterministic per seed."""
    sig = AlgebraSignature.of(sig)
    rng = np.random.default_rng(seed)
    blocks = []
    for n in sig:
        shape = (k * n, n)
        blocks.append(rng.standard_normal(shape) + 1j * rng.standard_normal(shape))
    return normalize(Frame(sig, k, tuple(blocks)))
