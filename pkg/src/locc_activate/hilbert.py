"""Dense state vectors and operators over multipartite tensor-product spaces.

Every factor of a :class:`PartyLayout` carries a label that is unique across
the layout (``"b1"``, ``"a2"`` ...).  Operations that act on part of a system
take *factor references*: a label, a party name (meaning all of that
party's factors) or a ``(party, index)`` tuple.  Global basis indices are the
big-endian mixed-radix encoding of the per-factor digits, parties in
declaration order and factors within a party in order.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from itertools import combinations
from typing import Iterable, Sequence

import numpy as np

from .errors import InputError

DEFAULT_TOL = 1e-10
UNITARY_TOL = 1e-12


def _default_labels(name, n):
    base = name.lower()
    if n == 1:
        return (base,)
    return tuple(f"{base}{i + 1}" for i in range(n))


@dataclass(frozen=True)
class Party:
    """A named party holding an ordered list of factors.

    ``factors`` are the local dimensions.  ``labels`` name each factor and
    default to the lower-cased party name, suffixed ``1, 2, ...`` when the
    party holds more than one factor.
    """

    name: str
    factors: tuple[int, ...]
    labels: tuple[str, ...] = ()

    def __post_init__(self):
        factors = tuple(int(d) for d in self.factors)
        if not factors:
            raise InputError(f"party {self.name!r} has no factors")
        for d in factors:
            if d < 2:
                raise InputError(f"party {self.name!r}: factor dimension {d} < 2")
        labels = tuple(self.labels) or _default_labels(self.name, len(factors))
        if len(labels) != len(factors):
            raise InputError(
                f"party {self.name!r}: {len(labels)} labels for {len(factors)} factors"
            )
        object.__setattr__(self, "factors", factors)
        object.__setattr__(self, "labels", labels)

    @property
    def dim(self) -> int:
        return int(np.prod(self.factors))


@dataclass(frozen=True)
class PartyLayout:
    parties: tuple[Party, ...]

    def __post_init__(self):
        parties = tuple(self.parties)
        if not parties:
            raise InputError("layout needs at least one party")
        names = [p.name for p in parties]
        if len(set(names)) != len(names):
            raise InputError(f"duplicate party names in {names}")
        labels = [lab for p in parties for lab in p.labels]
        if len(set(labels)) != len(labels):
            raise InputError(f"duplicate factor labels in {labels}")
        clash = set(names) & set(labels)
        for name in clash:
            owner = next(p for p in parties if name in p.labels)
            if owner.name != name or len(owner.factors) != 1:
                raise InputError(f"name {name!r} is both a party and a foreign factor label")
        object.__setattr__(self, "parties", parties)

    @classmethod
    def build(cls, parties: Iterable) -> "PartyLayout":
        """Build from ``(name, factors[, labels])`` tuples."""
        return cls(tuple(p if isinstance(p, Party) else Party(*p) for p in parties))

    @cached_property
    def dims(self) -> tuple[int, ...]:
        return tuple(d for p in self.parties for d in p.factors)

    @cached_property
    def labels(self) -> tuple[str, ...]:
        return tuple(lab for p in self.parties for lab in p.labels)

    @cached_property
    def owners(self) -> tuple[str, ...]:
        """Party name for each global factor position."""
        return tuple(p.name for p in self.parties for _ in p.factors)

    @property
    def total_dim(self) -> int:
        return int(np.prod(self.dims))

    @property
    def party_names(self) -> tuple[str, ...]:
        return tuple(p.name for p in self.parties)

    def party(self, name: str) -> Party:
        for p in self.parties:
            if p.name == name:
                return p
        raise InputError(f"unknown party {name!r}")

    def positions(self, refs) -> tuple[int, ...]:
        """Resolve factor references to sorted-by-appearance global positions.

        Order follows the references as given; duplicates are an error.
        """
        if isinstance(refs, (str, tuple)) and not _is_ref_list(refs):
            refs = [refs]
        out: list[int] = []
        for ref in refs:
            if isinstance(ref, tuple):
                name, idx = ref
                party = self.party(name)
                if not 0 <= idx < len(party.factors):
                    raise InputError(f"party {name!r} has no factor {idx}")
                out.append(self.labels.index(party.labels[idx]))
            elif ref in self.labels:
                out.append(self.labels.index(ref))
            elif ref in self.party_names:
                out.extend(self.labels.index(lab) for lab in self.party(ref).labels)
            else:
                raise InputError(f"unknown factor reference {ref!r}")
        if len(set(out)) != len(out):
            raise InputError(f"repeated factor in {list(refs)!r}")
        return tuple(out)

    def encode(self, digits: Sequence[int]) -> int:
        digits = tuple(int(x) for x in digits)
        if len(digits) != len(self.dims):
            raise InputError(f"expected {len(self.dims)} digits, got {len(digits)}")
        for lab, d, x in zip(self.labels, self.dims, digits):
            if not 0 <= x < d:
                raise InputError(f"digit {x} out of range for factor {lab!r} (dim {d})")
        return int(np.ravel_multi_index(digits, self.dims))

    def decode(self, index: int) -> tuple[int, ...]:
        if not 0 <= index < self.total_dim:
            raise InputError(f"index {index} out of range")
        return tuple(int(x) for x in np.unravel_index(index, self.dims))

    def sublayout(self, keep: Sequence[int]) -> "PartyLayout":
        """Layout restricted to the given global positions; empty parties drop."""
        keep = set(keep)
        parties = []
        pos = 0
        for p in self.parties:
            idx = [i for i in range(len(p.factors)) if pos + i in keep]
            if idx:
                parties.append(
                    Party(p.name, tuple(p.factors[i] for i in idx), tuple(p.labels[i] for i in idx))
                )
            pos += len(p.factors)
        if not parties:
            raise InputError("sublayout would be empty")
        return PartyLayout(tuple(parties))

    def describe(self) -> str:
        return " ".join(
            f"{p.name}(" + ",".join(f"{lab}:{d}" for lab, d in zip(p.labels, p.factors)) + ")"
            for p in self.parties
        )


def _is_ref_list(refs):
    # ("B", 0) is one reference; ("b1", "b2") is a list of two
    return isinstance(refs, tuple) and not (
        len(refs) == 2 and isinstance(refs[0], str) and isinstance(refs[1], (int, np.integer))
    )


def _frozen(arr):
    arr = np.array(arr, dtype=np.complex128)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class StateVector:
    layout: PartyLayout
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = _frozen(self.amplitudes).reshape(-1)
        if amps.shape[0] != self.layout.total_dim:
            raise InputError(
                f"{amps.shape[0]} amplitudes for layout of dimension {self.layout.total_dim}"
            )
        object.__setattr__(self, "amplitudes", amps)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def is_normalized(self, tol=DEFAULT_TOL) -> bool:
        return abs(self.norm() - 1.0) <= tol

    def tensor_view(self) -> np.ndarray:
        return self.amplitudes.reshape(self.layout.dims)

    def support(self, tol=DEFAULT_TOL) -> list[tuple[tuple[int, ...], complex]]:
        """Nonzero ``(digits, amplitude)`` pairs in index order."""
        idx = np.flatnonzero(np.abs(self.amplitudes) > tol)
        return [(self.layout.decode(int(i)), complex(self.amplitudes[i])) for i in idx]

    def __add__(self, other):
        return superpose([(1, self), (1, other)])

    def __sub__(self, other):
        return superpose([(1, self), (-1, other)])

    def __rmul__(self, c):
        return StateVector(self.layout, complex(c) * self.amplitudes)

    def __neg__(self):
        return StateVector(self.layout, -self.amplitudes)

    def __repr__(self):
        return f"StateVector({self.layout.describe()}, nnz={len(self.support())})"


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    layout: PartyLayout
    entries: np.ndarray

    def __post_init__(self):
        rho = _frozen(self.entries)
        d = self.layout.total_dim
        if rho.shape != (d, d):
            raise InputError(f"density matrix shape {rho.shape} does not match dimension {d}")
        object.__setattr__(self, "entries", rho)

    @classmethod
    def from_state(cls, v: StateVector) -> "DensityMatrix":
        a = v.amplitudes
        return cls(v.layout, np.outer(a, a.conj()))

    def trace(self) -> float:
        return float(np.trace(self.entries).real)

    def purity(self) -> float:
        return float(np.trace(self.entries @ self.entries).real)

    def hermiticity_residual(self) -> float:
        return float(np.max(np.abs(self.entries - self.entries.conj().T), initial=0.0))

    def min_eigenvalue(self) -> float:
        herm = (self.entries + self.entries.conj().T) / 2
        return float(np.linalg.eigvalsh(herm)[0])

    def is_valid(self, herm_tol=1e-12, psd_tol=1e-10) -> bool:
        t = self.trace()
        return (
            self.hermiticity_residual() <= herm_tol
            and self.min_eigenvalue() >= -psd_tol
            and -psd_tol <= t <= 1 + herm_tol
        )


@dataclass(frozen=True, eq=False)
class UnitaryOperator:
    """A unitary acting on the factors named by ``target`` (labels, in order)."""

    target: tuple[str, ...]
    dims: tuple[int, ...]
    matrix: np.ndarray
    name: str = ""

    def __post_init__(self):
        target = (self.target,) if isinstance(self.target, str) else tuple(self.target)
        dims = tuple(int(d) for d in self.dims)
        if len(target) != len(dims):
            raise InputError("unitary target and dims differ in length")
        mat = _frozen(self.matrix)
        d = int(np.prod(dims))
        if mat.shape != (d, d):
            raise InputError(f"unitary matrix shape {mat.shape} does not match target dimension {d}")
        resid = np.max(np.abs(mat.conj().T @ mat - np.eye(d)))
        if resid > UNITARY_TOL:
            raise InputError(f"matrix is not unitary (residual {resid:.3e})")
        object.__setattr__(self, "target", target)
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "matrix", mat)

    @classmethod
    def identity(cls, layout: PartyLayout, refs=None) -> "UnitaryOperator":
        pos = layout.positions(refs) if refs is not None else tuple(range(len(layout.dims)))
        dims = tuple(layout.dims[p] for p in pos)
        return cls(tuple(layout.labels[p] for p in pos), dims, np.eye(int(np.prod(dims))), "I")


def _check_target(layout, labels, dims):
    try:
        pos = layout.positions(tuple(labels))
    except InputError as exc:
        raise InputError(f"operator target not in layout: {exc}") from None
    got = tuple(layout.dims[p] for p in pos)
    if got != tuple(dims):
        raise InputError(f"operator dims {tuple(dims)} do not match layout dims {got}")
    return pos


def apply_local(amplitudes, dims, matrix, positions):
    """Apply ``matrix`` on the factors at ``positions`` of a flat amplitude array."""
    k = len(positions)
    psi = np.asarray(amplitudes).reshape(dims)
    psi = np.moveaxis(psi, positions, range(k))
    shape = psi.shape
    out = (matrix @ psi.reshape(matrix.shape[1], -1)).reshape(shape)
    return np.moveaxis(out, range(k), positions).reshape(-1)


def embed_operator(layout: PartyLayout, matrix, refs) -> np.ndarray:
    """Full-space matrix of ``matrix`` acting on ``refs`` and identity elsewhere."""
    pos = layout.positions(refs)
    n = layout.total_dim
    cols = [apply_local(np.eye(n)[:, j], layout.dims, np.asarray(matrix), pos) for j in range(n)]
    return np.stack(cols, axis=1)


def basis_state(layout: PartyLayout, digits: Sequence[int]) -> StateVector:
    amps = np.zeros(layout.total_dim, dtype=np.complex128)
    amps[layout.encode(digits)] = 1.0
    return StateVector(layout, amps)


def superpose(terms) -> StateVector:
    """Linear combination ``sum(c * v)``; the result is not normalized."""
    terms = list(terms)
    if not terms:
        raise InputError("superpose needs at least one term")
    layout = terms[0][1].layout
    amps = np.zeros(layout.total_dim, dtype=np.complex128)
    for c, v in terms:
        if v.layout != layout:
            raise InputError("superpose: terms live on different layouts")
        amps = amps + complex(c) * v.amplitudes
    return StateVector(layout, amps)


def normalize(v: StateVector) -> StateVector:
    n = v.norm()
    if n == 0.0:
        raise InputError("cannot normalize the zero vector")
    return StateVector(v.layout, v.amplitudes / n)


def inner(a: StateVector, b: StateVector) -> complex:
    """<a|b>, conjugate-linear in ``a``."""
    if a.layout != b.layout:
        raise InputError("inner: layouts differ")
    return complex(np.vdot(a.amplitudes, b.amplitudes))


def gram_matrix(vectors: Sequence[StateVector]) -> np.ndarray:
    if not vectors:
        return np.zeros((0, 0), dtype=np.complex128)
    layout = vectors[0].layout
    if any(v.layout != layout for v in vectors):
        raise InputError("gram_matrix: layouts differ")
    m = np.stack([v.amplitudes for v in vectors])
    return m.conj() @ m.T


def tensor(a: StateVector, b: StateVector, layout: PartyLayout | None = None) -> StateVector:
    """Tensor product, optionally re-indexed onto a merged layout.

    Without ``layout`` the parties of ``b`` are appended after those of
    ``a``.  With ``layout``, factors are matched by label: the merged layout
    must hold exactly the factors of ``a`` and ``b`` (same labels and
    dimensions) in any order, which is how interleavings such as
    ``A = (A1, A2) | B = (b1, b2, B2)`` are expressed.
    """
    prod = np.kron(a.amplitudes, b.amplitudes)
    if layout is None:
        return StateVector(PartyLayout(a.layout.parties + b.layout.parties), prod)
    src_labels = a.layout.labels + b.layout.labels
    src_dims = a.layout.dims + b.layout.dims
    if sorted(src_labels) != sorted(layout.labels) or len(src_labels) != len(layout.labels):
        raise InputError(
            f"merged layout factors {layout.labels} inconsistent with {src_labels}"
        )
    perm = [src_labels.index(lab) for lab in layout.labels]
    if tuple(src_dims[i] for i in perm) != layout.dims:
        raise InputError("merged layout dimensions inconsistent with the operands")
    psi = prod.reshape(src_dims).transpose(perm)
    return StateVector(layout, psi.reshape(-1))


def with_layout(v: StateVector, layout: PartyLayout) -> StateVector:
    """Reinterpret amplitudes on another layout with identical factor dims."""
    if layout.dims != v.layout.dims:
        raise InputError(f"dims {layout.dims} differ from {v.layout.dims}")
    return StateVector(layout, v.amplitudes)


def partial_trace(state: StateVector | DensityMatrix, discard) -> DensityMatrix:
    """Trace out the factors referenced by ``discard``."""
    layout = state.layout
    disc = layout.positions(discard)
    if not disc:
        raise InputError("partial_trace: nothing to discard")
    keep = [i for i in range(len(layout.dims)) if i not in disc]
    if not keep:
        raise InputError("partial_trace: cannot discard every factor")
    dims = layout.dims
    dk = int(np.prod([dims[i] for i in keep]))
    if isinstance(state, StateVector):
        psi = state.tensor_view().transpose(keep + list(disc)).reshape(dk, -1)
        rho = psi @ psi.conj().T
    else:
        n = len(dims)
        rho = state.entries.reshape(dims + dims)
        for cur, p in enumerate(sorted(disc, reverse=True)):
            rho = np.trace(rho, axis1=p, axis2=p + n - cur)
        rho = rho.reshape(dk, dk)
    return DensityMatrix(layout.sublayout(keep), rho)


def schmidt_coefficients(v: StateVector, part, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Singular values, descending, of the amplitudes reshaped along ``part``.

    ``tol`` only drops exact-noise values below it; use :func:`schmidt_rank`
    to count.
    """
    layout = v.layout
    left = list(layout.positions(part))
    right = [i for i in range(len(layout.dims)) if i not in left]
    if not left or not right:
        raise InputError("bipartition must be proper and non-empty")
    dl = int(np.prod([layout.dims[i] for i in left]))
    m = v.tensor_view().transpose(left + right).reshape(dl, -1)
    s = np.linalg.svd(m, compute_uv=False)
    return s[s > tol]


def schmidt_rank(v: StateVector, part, tol: float = DEFAULT_TOL) -> int:
    return int(len(schmidt_coefficients(v, part, tol)))


def party_bipartitions(layout: PartyLayout) -> list[tuple[str, ...]]:
    """Every proper bipartition of parties, as the side containing the first party."""
    names = layout.party_names
    first, rest = names[0], names[1:]
    out = []
    for r in range(0, len(rest)):
        for combo in combinations(rest, r):
            out.append((first,) + combo)
    return out


def apply_unitary(v: StateVector, u: UnitaryOperator) -> StateVector:
    pos = _check_target(v.layout, u.target, u.dims)
    return StateVector(v.layout, apply_local(v.amplitudes, v.layout.dims, u.matrix, pos))


def fidelity_up_to_phase(a: StateVector, b: StateVector, tol: float = DEFAULT_TOL) -> float:
    """|<a|b>| for unit vectors; 1 exactly when they differ by a global phase."""
    for name, v in (("a", a), ("b", b)):
        if not v.is_normalized(tol):
            raise InputError(f"fidelity_up_to_phase: {name} is not normalized (norm {v.norm()})")
    return float(min(1.0, abs(inner(a, b))))


def random_state(layout: PartyLayout, rng: np.random.Generator) -> StateVector:
    """Haar-random unit vector (Gaussian sampling)."""
    d = layout.total_dim
    z = rng.normal(size=d) + 1j * rng.normal(size=d)
    return StateVector(layout, z / np.linalg.norm(z))


def trace_distance(r1: DensityMatrix, r2: DensityMatrix) -> float:
    if r1.layout != r2.layout:
        raise InputError("trace_distance: layouts differ")
    diff = r1.entries - r2.entries
    return float(0.5 * np.sum(np.abs(np.linalg.eigvalsh((diff + diff.conj().T) / 2))))


def overlap(r1: DensityMatrix, r2: DensityMatrix) -> float:
    """tr(r1 r2); zero exactly when the supports are orthogonal."""
    if r1.layout != r2.layout:
        raise InputError("overlap: layouts differ")
    return float(np.real(np.sum(r1.entries.T * r2.entries)))
