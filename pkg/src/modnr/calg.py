"""Finite-dimensional C*-algebras ``A = M_{n_1}(C) + ... + M_{n_m}(C)``.

Elements are stored block by block as dense complex matrices.  States are
stored as a tuple of positive semidefinite densities whose traces sum to one,
so ``rho(a) = sum_j tr(D_j a_j)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

ATOL = 1e-9
RTOL = 1e-9


def _frozen(a) -> np.ndarray:
    arr = np.array(a, dtype=complex)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class AlgebraSignature:
    """Block sizes ``[n_1, ..., n_m]`` of a direct sum of matrix algebras."""

    block_dims: tuple[int, ...]

    def __post_init__(self):
        dims = tuple(int(n) for n in self.block_dims)
        if len(dims) == 0:
            raise ValueError("signature needs at least one block")
        if any(n < 1 for n in dims):
            raise ValueError(f"block sizes must be positive, got {list(dims)}")
        object.__setattr__(self, "block_dims", dims)

    @classmethod
    def of(cls, sig) -> "AlgebraSignature":
        if isinstance(sig, AlgebraSignature):
            return sig
        if isinstance(sig, int):
            return cls((sig,))
        return cls(tuple(sig))

    def __len__(self):
        return len(self.block_dims)

    def __iter__(self):
        return iter(self.block_dims)

    def to_list(self) -> list[int]:
        return list(self.block_dims)


def _check_same(s1: AlgebraSignature, s2: AlgebraSignature):
    if s1 != s2:
        raise ValueError(f"signature mismatch: {s1.to_list()} vs {s2.to_list()}")


@dataclass(frozen=True, eq=False)
class AlgebraElement:
    signature: AlgebraSignature
    blocks: tuple[np.ndarray, ...]

    def __post_init__(self):
        sig = AlgebraSignature.of(self.signature)
        blocks = tuple(_frozen(b) for b in self.blocks)
        if len(blocks) != len(sig):
            raise ValueError(f"expected {len(sig)} blocks, got {len(blocks)}")
        for n, b in zip(sig, blocks):
            if b.shape != (n, n):
                raise ValueError(f"block of shape {b.shape} does not match size {n}")
        object.__setattr__(self, "signature", sig)
        object.__setattr__(self, "blocks", blocks)

    @classmethod
    def from_matrix(cls, m) -> "AlgebraElement":
        """Single-block element of ``M_n(C)``."""
        m = np.asarray(m, dtype=complex)
        return cls(AlgebraSignature((m.shape[0],)), (m,))

    def _map(self, fn) -> "AlgebraElement":
        return AlgebraElement(self.signature, tuple(fn(b) for b in self.blocks))

    def __add__(self, other):
        _check_same(self.signature, other.signature)
        return AlgebraElement(self.signature, tuple(a + b for a, b in zip(self.blocks, other.blocks)))

    def __sub__(self, other):
        _check_same(self.signature, other.signature)
        return AlgebraElement(self.signature, tuple(a - b for a, b in zip(self.blocks, other.blocks)))

    def __neg__(self):
        return self._map(lambda b: -b)

    def __mul__(self, other):
        if isinstance(other, AlgebraElement):
            _check_same(self.signature, other.signature)
            return AlgebraElement(self.signature, tuple(a @ b for a, b in zip(self.blocks, other.blocks)))
        return self._map(lambda b: b * complex(other))

    def __rmul__(self, scalar):
        return self._map(lambda b: complex(scalar) * b)

    def allclose(self, other, atol: float = ATOL, rtol: float = RTOL) -> bool:
        if self.signature != other.signature:
            return False
        return all(np.allclose(a, b, atol=atol, rtol=rtol) for a, b in zip(self.blocks, other.blocks))


def identity(sig) -> AlgebraElement:
    sig = AlgebraSignature.of(sig)
    return AlgebraElement(sig, tuple(np.eye(n) for n in sig))


def zero(sig) -> AlgebraElement:
    sig = AlgebraSignature.of(sig)
    return AlgebraElement(sig, tuple(np.zeros((n, n)) for n in sig))


def adjoint(a: AlgebraElement) -> AlgebraElement:
    return a._map(lambda b: b.conj().T)


def real_part(a: AlgebraElement) -> AlgebraElement:
    """``(a + a*) / 2``."""
    return a._map(lambda b: (b + b.conj().T) / 2)


def imag_part(a: AlgebraElement) -> AlgebraElement:
    """``(a - a*) / 2i``, so that ``a = Re(a) + i Im(a)``."""
    return a._map(lambda b: (b - b.conj().T) / 2j)


def norm(a: AlgebraElement) -> float:
    """C*-norm: largest singular value over all blocks."""
    return max(float(np.linalg.norm(b, 2)) if b.size else 0.0 for b in a.blocks)


def is_self_adjoint(a: AlgebraElement, tol: float = ATOL) -> bool:
    return norm(a - adjoint(a)) <= tol * (1 + norm(a))


def random_element(sig, seed=None) -> AlgebraElement:
    """Complex Gaussian element, entries of variance ``1/n`` per block."""
    sig = AlgebraSignature.of(sig)
    rng = np.random.default_rng(seed)
    blocks = []
    for n in sig:
        g = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        blocks.append(g / np.sqrt(2 * n))
    return AlgebraElement(sig, tuple(blocks))


@dataclass(frozen=True, eq=False)
class State:
    """A state on ``A`` given by block densities with total trace one."""

    signature: AlgebraSignature
    densities: tuple[np.ndarray, ...]
    tol: float = 1e-12

    def __post_init__(self):
        sig = AlgebraSignature.of(self.signature)
        dens = tuple(_frozen(d) for d in self.densities)
        if len(dens) != len(sig):
            raise ValueError(f"expected {len(sig)} densities, got {len(dens)}")
        total = 0.0
        for n, d in zip(sig, dens):
            if d.shape != (n, n):
                raise ValueError(f"density of shape {d.shape} does not match size {n}")
            scale = max(1.0, float(np.abs(d).max(initial=0.0)))
            if np.abs(d - d.conj().T).max(initial=0.0) > self.tol * scale:
                raise ValueError("density is not Hermitian")
            if np.linalg.eigvalsh(d)[0] < -self.tol * scale:
                raise ValueError("density is not positive semidefinite")
            total += float(np.trace(d).real)
        if abs(total - 1) > self.tol:
            raise ValueError(f"densities have total trace {total}, expected 1")
        object.__setattr__(self, "signature", sig)
        object.__setattr__(self, "densities", dens)

    def __call__(self, a: AlgebraElement) -> complex:
        return state_eval(self, a)


def state_eval(rho: State, a: AlgebraElement) -> complex:
    """``rho(a) = sum_j tr(D_j a_j)``."""
    _check_same(rho.signature, a.signature)
    return complex(sum(np.einsum("ij,ji->", d, b) for d, b in zip(rho.densities, a.blocks)))


def _sample_densities(rng, sig: AlgebraSignature, size: int) -> list[np.ndarray]:
    """``size`` random states as per-block density stacks of shape ``(size, n, n)``.

    Each block gets ``G G*`` for a complex Gaussian ``G`` of random rank, mixed
    across blocks with Dirichlet weights.  Low ranks are kept on purpose so
    that nearly pure states get sampled too.
    """
    weights = rng.dirichlet(np.ones(len(sig)), size=size)
    dens = []
    for j, n in enumerate(sig):
        ranks = rng.integers(1, n + 1, size=size)
        g = rng.standard_normal((size, n, n)) + 1j * rng.standard_normal((size, n, n))
        g = g * (np.arange(n)[None, None, :] < ranks[:, None, None])
        d = g @ np.swapaxes(g.conj(), 1, 2)
        d = (d + np.swapaxes(d.conj(), 1, 2)) / 2
        tr = np.einsum("sii->s", d).real
        dens.append(d * (weights[:, j] / tr)[:, None, None])
    total = sum(np.einsum("sii->s", d).real for d in dens)
    return [d / total[:, None, None] for d in dens]


def random_state(sig, seed=None) -> State:
    """Random state, deterministic per seed."""
    sig = AlgebraSignature.of(sig)
    dens = _sample_densities(np.random.default_rng(seed), sig, 1)
    return State(sig, tuple(d[0] for d in dens))


def state_sup(a: AlgebraElement, tol: float = 1e-10) -> float:
    """``sup |rho(a)|`` over all states of ``A``.

    States of a direct sum realise exactly the convex hull of the blocks'
    numerical ranges, so this is the largest block numerical radius.
    """
    from .radius import classical_nr

    return max(classical_nr(b, tol=tol).value for b in a.blocks)


def c_star_defect(a: AlgebraElement) -> float:
    """``| ||a*a|| - ||a||^2 |``."""
    return abs(norm(adjoint(a) * a) - norm(a) ** 2)
