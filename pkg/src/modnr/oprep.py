"""Adjointable operators on ``A^k``.

For ``A = M_{n_1} + ... + M_{n_m}`` the C*-algebra ``L(A^k) = M_k(A)`` is
identified with ``M_{k n_1} + ... + M_{k n_m}``.  The stored block matrices
are therefore a faithful representation of the operator, and every norm or
spectral quantity reduces to dense linear algebra per block.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .calg import AlgebraElement, AlgebraSignature, _frozen
from .hmodule import Frame

DEFAULT_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class ModuleOperator:
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
            if b.shape != (k * n, k * n):
                raise ValueError(f"operator block of shape {b.shape}, expected {(k * n, k * n)}")
        object.__setattr__(self, "signature", sig)
        object.__setattr__(self, "k", k)
        object.__setattr__(self, "blocks", blocks)

    @classmethod
    def from_matrix(cls, m, k: int = 1) -> "ModuleOperator":
        """Single-block operator on ``M_n(C)^k`` from a ``(k n) x (k n)`` matrix."""
        m = np.asarray(m, dtype=complex)
        if m.shape[0] % k:
            raise ValueError(f"matrix size {m.shape[0]} is not a multiple of k={k}")
        return cls(AlgebraSignature((m.shape[0] // k,)), k, (m,))

    def _map(self, fn) -> "ModuleOperator":
        return ModuleOperator(self.signature, self.k, tuple(fn(b) for b in self.blocks))

    def _zip(self, other, fn) -> "ModuleOperator":
        _check_conform(self, other)
        return ModuleOperator(self.signature, self.k, tuple(fn(a, b) for a, b in zip(self.blocks, other.blocks)))

    def __add__(self, other):
        return add(self, other)

    def __sub__(self, other):
        return self._zip(other, lambda a, b: a - b)

    def __neg__(self):
        return self._map(lambda b: -b)

    def __matmul__(self, other):
        if isinstance(other, Frame):
            return apply(self, other)
        return compose(self, other)

    def __mul__(self, s):
        return scale(self, s)

    __rmul__ = __mul__

    @property
    def H(self) -> "ModuleOperator":
        return adjoint(self)

    @property
    def dims(self) -> tuple[int, ...]:
        """Sizes of the flattened blocks, ``k * n_j``."""
        return tuple(self.k * n for n in self.signature)


def _check_conform(s, t):
    if s.signature != t.signature or s.k != t.k:
        raise ValueError(
            f"operator shape mismatch: sig {s.signature.to_list()} k={s.k} vs "
            f"sig {t.signature.to_list()} k={t.k}"
        )


def apply(t: ModuleOperator, x: Frame) -> Frame:
    _check_conform(t, x)
    return Frame(x.signature, x.k, tuple(m @ b for m, b in zip(t.blocks, x.blocks)))


def adjoint(t: ModuleOperator) -> ModuleOperator:
    return t._map(lambda b: b.conj().T)


def compose(s: ModuleOperator, t: ModuleOperator) -> ModuleOperator:
    """``s t`` (apply ``t`` first)."""
    return s._zip(t, lambda a, b: a @ b)


def add(s: ModuleOperator, t: ModuleOperator) -> ModuleOperator:
    return s._zip(t, lambda a, b: a + b)


def scale(t: ModuleOperator, s: complex) -> ModuleOperator:
    s = complex(s)
    return t._map(lambda b: s * b)


def real_part(t: ModuleOperator) -> ModuleOperator:
    return t._map(lambda b: (b + b.conj().T) / 2)


def imag_part(t: ModuleOperator) -> ModuleOperator:
    return t._map(lambda b: (b - b.conj().T) / 2j)


def identity_operator(sig, k: int = 1) -> ModuleOperator:
    sig = AlgebraSignature.of(sig)
    return ModuleOperator(sig, k, tuple(np.eye(k * n) for n in sig))


def zero_operator(sig, k: int = 1) -> ModuleOperator:
    sig = AlgebraSignature.of(sig)
    return ModuleOperator(sig, k, tuple(np.zeros((k * n, k * n)) for n in sig))


def left_mult(a: AlgebraElement, k: int = 1) -> ModuleOperator:
    """``L_a``: left multiplication by ``a`` in every module slot.

    For ``k = 1`` the stored block is ``a_j`` itself.
    """
    return ModuleOperator(a.signature, k, tuple(np.kron(np.eye(k), b) for b in a.blocks))


def op_norm(t: ModuleOperator) -> float:
    return max(float(np.linalg.norm(b, 2)) for b in t.blocks)


def _block_spectral_radius(m: np.ndarray, tol: float, max_squarings: int) -> float:
    # Gelfand: r = lim ||M^(2^s)||^(1/2^s); keep M^(2^s) = exp(logscale) * B with ||B|| = 1.
    c = np.linalg.norm(m, 2)
    if c == 0:
        return 0.0
    b = m / c
    logscale = math.log(c)
    r_prev = c
    for s in range(1, max_squarings + 1):
        b = b @ b
        c = np.linalg.norm(b, 2)
        if c == 0:
            return 0.0
        b = b / c
        logscale = 2 * logscale + math.log(c)
        r = math.exp(logscale / 2**s)
        if abs(r - r_prev) <= tol * (1 + r_prev):
            return r
        r_prev = r
    return r_prev


def spectral_radius(t: ModuleOperator, tol: float = 1e-12, max_squarings: int = 60) -> float:
    """Largest block spectral radius, by repeated squaring in the Gelfand formula.

    The sequence ``||M^(2^s)||^(1/2^s)`` is non-increasing, so the result is
    an upper estimate that stops once consecutive terms agree to ``tol``.
    """
    for b in t.blocks:
        if not np.all(np.isfinite(b)):
            raise ValueError("operator has non-finite entries")
    return max(_block_spectral_radius(np.asarray(b), tol, max_squarings) for b in t.blocks)


def is_self_adjoint(t: ModuleOperator, tol: float = DEFAULT_TOL) -> bool:
    return op_norm(t - adjoint(t)) <= tol * max(1.0, op_norm(t))


def is_normal(t: ModuleOperator, tol: float = DEFAULT_TOL) -> bool:
    th = adjoint(t)
    return op_norm(th @ t - t @ th) <= tol * op_norm(t) ** 2


def is_nilpotent2(t: ModuleOperator, tol: float = DEFAULT_TOL) -> bool:
    return op_norm(t @ t) <= tol * op_norm(t) ** 2


def amplify(t: ModuleOperator, copies: int) -> ModuleOperator:
    """``pi(T) + ... + pi(T)`` (``copies`` times), acting on ``A^(copies*k)``."""
    if copies < 1:
        raise ValueError("copies must be at least 1")
    return ModuleOperator(
        t.signature, t.k * copies, tuple(np.kron(np.eye(copies), b) for b in t.blocks)
    )
