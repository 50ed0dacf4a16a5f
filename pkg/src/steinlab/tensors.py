"""Symmetric tensors on R^d and multivariate Hermite polynomials.

Symmetric k-tensors are stored by their canonical (sorted) index, one value
per orbit of the permutation group.  Norms and inner products are the ones of
the full d^k array, so each canonical entry carries its multinomial
multiplicity.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

__all__ = [
    "MultiIndex",
    "SymTensor",
    "canonical_indices",
    "multiplicity",
    "multi_indices",
    "index_to_exponents",
    "exponents_to_index",
    "hermite_1d",
    "hermite_eval",
    "hermite_tensor",
    "gauss_hermite",
    "inner",
    "tensor_apply",
    "symmetrize",
]

MultiIndex = tuple  # exponent vector (i_1, ..., i_d)


def multi_indices(dim: int, degree: int) -> list[tuple[int, ...]]:
    """All exponent vectors of total ``degree`` in ``dim`` variables.

    Ordered so that concatenating over increasing degree gives graded
    lexicographic order (x_1 is the most significant variable).
    """
    out = []
    for idx in itertools.combinations_with_replacement(range(dim), degree):
        out.append(index_to_exponents(idx, dim))
    out.sort(reverse=True)
    return out


def graded_basis(dim: int, min_degree: int, max_degree: int) -> list[tuple[int, ...]]:
    return [a for m in range(min_degree, max_degree + 1) for a in multi_indices(dim, m)]


def index_to_exponents(index, dim: int) -> tuple[int, ...]:
    counts = [0] * dim
    for i in index:
        counts[i] += 1
    return tuple(counts)


def exponents_to_index(alpha) -> tuple[int, ...]:
    return tuple(j for j, a in enumerate(alpha) for _ in range(a))


@lru_cache(maxsize=None)
def canonical_indices(dim: int, order: int) -> tuple[tuple[int, ...], ...]:
    """Sorted 0-based index tuples, one per symmetry orbit."""
    return tuple(itertools.combinations_with_replacement(range(dim), order))


@lru_cache(maxsize=None)
def _position(dim: int, order: int) -> dict:
    return {idx: n for n, idx in enumerate(canonical_indices(dim, order))}


def multiplicity(index) -> int:
    """Number of ordered indices that sort to ``index``."""
    counts = {}
    for i in index:
        counts[i] = counts.get(i, 0) + 1
    m = math.factorial(len(index))
    for c in counts.values():
        m //= math.factorial(c)
    return m


@lru_cache(maxsize=None)
def _multiplicities(dim: int, order: int) -> np.ndarray:
    w = np.array([multiplicity(i) for i in canonical_indices(dim, order)], dtype=float)
    w.setflags(write=False)
    return w


@dataclass(frozen=True)
class SymTensor:
    """Symmetric tensor of a given order on R^dim.

    ``values[n]`` is the entry at ``canonical_indices(dim, order)[n]``.
    Any permutation of an index reads the same entry.
    """

    order: int
    dim: int
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        vals = np.array(self.values, dtype=float).reshape(-1)
        expected = len(canonical_indices(self.dim, self.order))
        if vals.size != expected:
            raise ValueError(
                f"expected {expected} canonical entries for order {self.order}, "
                f"dim {self.dim}; got {vals.size}"
            )
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @classmethod
    def zeros(cls, order: int, dim: int) -> "SymTensor":
        return cls(order, dim, np.zeros(len(canonical_indices(dim, order))))

    @classmethod
    def identity(cls, dim: int) -> "SymTensor":
        return cls.from_full(np.eye(dim))

    @classmethod
    def from_entries(cls, order: int, dim: int, entries: dict) -> "SymTensor":
        """Build from ``{index: value}``; indices may be given in any order."""
        vals = np.zeros(len(canonical_indices(dim, order)))
        pos = _position(dim, order)
        for idx, v in entries.items():
            vals[pos[tuple(sorted(idx))]] = v
        return cls(order, dim, vals)

    @classmethod
    def from_full(cls, arr, check: bool = True, atol: float = 1e-12) -> "SymTensor":
        arr = np.asarray(arr, dtype=float)
        order, dim = arr.ndim, (arr.shape[0] if arr.ndim else 1)
        if check and order > 1:
            sym = symmetrize(arr)
            if not np.allclose(sym, arr, atol=atol, rtol=0):
                raise ValueError("array is not symmetric")
        vals = [arr[idx] for idx in canonical_indices(dim, order)]
        return cls(order, dim, np.array(vals))

    def __getitem__(self, index) -> float:
        if isinstance(index, (int, np.integer)):
            index = (index,)
        index = tuple(sorted(int(i) for i in index))
        if len(index) != self.order:
            raise IndexError(f"expected {self.order} indices, got {len(index)}")
        return float(self.values[_position(self.dim, self.order)[index]])

    def with_entry(self, index, value: float) -> "SymTensor":
        vals = self.values.copy()
        vals[_position(self.dim, self.order)[tuple(sorted(index))]] = value
        return SymTensor(self.order, self.dim, vals)

    @property
    def multiplicities(self) -> np.ndarray:
        return _multiplicities(self.dim, self.order)

    def to_full(self) -> np.ndarray:
        out = np.empty((self.dim,) * self.order)
        pos = _position(self.dim, self.order)
        for idx in itertools.product(range(self.dim), repeat=self.order):
            out[idx] = self.values[pos[tuple(sorted(idx))]]
        return out

    def norm(self) -> float:
        return math.sqrt(inner(self, self))

    def __add__(self, other: "SymTensor") -> "SymTensor":
        _check_compatible(self, other)
        return SymTensor(self.order, self.dim, self.values + other.values)

    def __sub__(self, other: "SymTensor") -> "SymTensor":
        _check_compatible(self, other)
        return SymTensor(self.order, self.dim, self.values - other.values)

    def __mul__(self, c: float) -> "SymTensor":
        return SymTensor(self.order, self.dim, self.values * float(c))

    __rmul__ = __mul__


def _check_compatible(a: SymTensor, b: SymTensor):
    if a.order != b.order or a.dim != b.dim:
        raise ValueError(
            f"tensor mismatch: order {a.order} vs {b.order}, dim {a.dim} vs {b.dim}"
        )


def inner(a: SymTensor, b: SymTensor) -> float:
    """Full Euclidean inner product, summed over all d^k ordered indices."""
    _check_compatible(a, b)
    return float(np.sum(a.multiplicities * a.values * b.values))


def symmetrize(arr: np.ndarray) -> np.ndarray:
    """Average of ``arr`` over all permutations of its axes."""
    arr = np.asarray(arr, dtype=float)
    perms = list(itertools.permutations(range(arr.ndim)))
    return sum(np.transpose(arr, p) for p in perms) / len(perms)


def tensor_apply(a: SymTensor, y) -> SymTensor:
    """Contract the last slot of ``a`` with the vector ``y``."""
    y = np.asarray(y, dtype=float).reshape(-1)
    if y.size != a.dim:
        raise ValueError(f"vector of length {y.size} for tensor of dim {a.dim}")
    if a.order == 0:
        raise ValueError("cannot contract an order-0 tensor")
    full = np.tensordot(a.to_full(), y, axes=([a.order - 1], [0]))
    return SymTensor.from_full(full, check=False)


# --- Hermite polynomials -------------------------------------------------


def hermite_1d(n: int, t) -> np.ndarray:
    """Probabilists' Hermite values H_0..H_n at ``t``; shape ``(n + 1,) + t.shape``."""
    t = np.asarray(t, dtype=float)
    out = np.empty((n + 1,) + t.shape)
    out[0] = 1.0
    if n >= 1:
        out[1] = t
    for m in range(1, n):
        out[m + 1] = t * out[m] - m * out[m - 1]
    return out


def hermite_eval(alpha, x) -> np.ndarray | float:
    """H_alpha(x) = prod_j H_{alpha_j}(x_j).

    ``x`` has shape ``(..., d)`` (or is a scalar when d = 1).
    """
    alpha = tuple(int(a) for a in np.atleast_1d(alpha))
    x = np.asarray(x, dtype=float)
    if len(alpha) == 1 and (x.ndim == 0 or x.shape[-1] != 1):
        x = x[..., None]
    if x.shape[-1] != len(alpha):
        raise ValueError(f"point dimension {x.shape[-1]} != len(alpha) {len(alpha)}")
    val = np.ones(x.shape[:-1])
    for j, a in enumerate(alpha):
        if a:
            val = val * hermite_1d(a, x[..., j])[a]
    return val if val.ndim else float(val)


def hermite_tensor(k: int, x) -> SymTensor:
    """The k-tensor of all degree-k Hermite polynomials at the point ``x``."""
    if k < 1:
        raise ValueError("k must be >= 1")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    d = x.size
    table = hermite_1d(k, x)  # (k+1, d)
    vals = []
    for idx in canonical_indices(d, k):
        alpha = index_to_exponents(idx, d)
        vals.append(np.prod([table[a, j] for j, a in enumerate(alpha)]))
    return SymTensor(k, d, np.array(vals))


@lru_cache(maxsize=None)
def gauss_hermite(n: int = 64) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights integrating against the standard Gaussian on R."""
    x, w = np.polynomial.hermite_e.hermegauss(n)
    w = w / math.sqrt(2 * math.pi)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w
