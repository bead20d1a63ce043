"""Measurement operators and signal generators.

Operators are stored block-wise as (possibly complex) dense matrices; the
solver consumes their real representation, which depends on the coefficient
set: a complex matrix acting on real coefficients contributes two real rows
(re, im) per measurement, while acting on complex coefficients each entry
a+ib becomes the 2x2 block [[a, -b], [b, a]].

2D Fourier samplers operate on M x M arrays vectorized in C order (row
t0 of the array occupies coefficients [t0*M, (t0+1)*M)), so the anisotropic
sampler factors exactly through a repeated-block partial-DFT operator.
"""

import enum
import itertools
import json
from dataclasses import dataclass, field

import numpy as np

from .coeffsets import CoeffSet, SignalVector
from .seeds import as_rng

DFT_SIGN = +1.0  # exponent sign of the forward transform


class OperatorKind(enum.Enum):
    DENSE = "dense"
    BLOCK_DIAG_REPEATED = "block_diag_repeated"
    BLOCK_DIAG_DISTINCT = "block_diag_distinct"
    ANISO_2D = "aniso_2d"
    ISO_2D = "iso_2d"


@dataclass(frozen=True)
class ProblemSizes:
    """Per-block sizes (ell, m, M) and block count B, with derived totals."""

    ell: int
    m: int
    M: int
    B: int = 1

    def __post_init__(self):
        if not (0 <= self.ell <= self.M):
            raise ValueError(f"need 0 <= ell <= M, got ell={self.ell}, M={self.M}")
        if not (1 <= self.m <= self.M):
            raise ValueError(f"need 1 <= m <= M, got m={self.m}, M={self.M}")
        if self.B < 1:
            raise ValueError("need B >= 1")

    @property
    def k(self):
        return self.B * self.ell

    @property
    def n(self):
        return self.B * self.m

    @property
    def N(self):
        return self.B * self.M

    @property
    def delta(self):
        return self.m / self.M

    @property
    def eps(self):
        return self.ell / self.M


def real_rep_matrix(block, ambient):
    """Real representation of a (possibly complex) matrix.

    ambient 1: complex rows split into interleaved (re, im) real rows.
    ambient 2: each entry a+ib becomes [[a, -b], [b, a]].
    Real input matrices pass through (ambient 1) or act pair-wise (ambient 2).
    """
    block = np.asarray(block)
    m, M = block.shape
    a = block.real.astype(float)
    b = block.imag.astype(float) if np.iscomplexobj(block) else np.zeros_like(a)
    if ambient == 1:
        if not np.iscomplexobj(block):
            return a.copy()
        out = np.empty((2 * m, M))
        out[0::2] = a
        out[1::2] = b
        return out
    out = np.zeros((2 * m, 2 * M))
    out[0::2, 0::2] = a
    out[0::2, 1::2] = -b
    out[1::2, 0::2] = b
    out[1::2, 1::2] = a
    return out


def complex_to_real_vec(z):
    """Interleaved (re, im) real vector of a complex vector."""
    z = np.asarray(z)
    out = np.empty(2 * z.shape[0])
    out[0::2] = z.real
    out[1::2] = z.imag
    return out


def real_vec_to_complex(v):
    v = np.asarray(v, dtype=float)
    return v[0::2] + 1j * v[1::2]


@dataclass
class MeasurementOperator:
    """An n x N linear map given by its diagonal blocks plus provenance.

    `rows`/`cols` count coefficients (complex coefficients count once);
    real dimensions follow from the coefficient set at application time.
    BLOCK_DIAG_REPEATED stores a single block applied B times.
    """

    kind: OperatorKind
    rows: int
    cols: int
    blocks: list
    num_blocks: int = 1
    sample_set: list = None
    descriptor: dict = field(default=None, repr=False)

    @property
    def block_shape(self):
        m, M = self.blocks[0].shape
        return m, M

    @property
    def is_complex(self):
        return any(np.iscomplexobj(b) for b in self.blocks)

    def real_block_stack(self, coeff_set):
        """(B, r, c) stack of real-representation blocks for the solver."""
        amb = coeff_set.ambient_dim
        reals = [real_rep_matrix(b, amb) for b in self.blocks]
        if self.kind is OperatorKind.BLOCK_DIAG_REPEATED:
            return np.broadcast_to(reals[0], (self.num_blocks,) + reals[0].shape)
        if self.kind is OperatorKind.BLOCK_DIAG_DISTINCT:
            return np.stack(reals)
        return reals[0][None]

    def dense_real(self, coeff_set):
        """Dense real matrix; reference path for all checks."""
        stack = self.real_block_stack(coeff_set)
        B, r, c = stack.shape
        if B == 1:
            return stack[0].copy()
        out = np.zeros((B * r, B * c))
        for b in range(B):
            out[b * r:(b + 1) * r, b * c:(b + 1) * c] = stack[b]
        return out

    def dense_complex(self):
        """Dense complex matrix (Fourier provenance operators only)."""
        if self.kind in (OperatorKind.ANISO_2D, OperatorKind.ISO_2D):
            return self.blocks[0].copy()
        if not self.is_complex:
            raise ValueError("operator has no complex representation")
        m, M = self.block_shape
        out = np.zeros((self.rows, self.cols), dtype=complex)
        for b in range(self.num_blocks):
            blk = self.blocks[0] if self.kind is OperatorKind.BLOCK_DIAG_REPEATED \
                else self.blocks[b]
            out[b * m:(b + 1) * m, b * M:(b + 1) * M] = blk
        return out

    def apply(self, x_real, coeff_set):
        """Apply to a real-representation vector, returning real measurements."""
        stack = self.real_block_stack(coeff_set)
        B, r, c = stack.shape
        xb = np.asarray(x_real, dtype=float).reshape(B, c)
        return np.einsum("brc,bc->br", stack, xb).reshape(B * r)

    def adjoint(self, y_real, coeff_set):
        stack = self.real_block_stack(coeff_set)
        B, r, c = stack.shape
        yb = np.asarray(y_real, dtype=float).reshape(B, r)
        return np.einsum("brc,br->bc", stack, yb).reshape(B * c)

    def to_descriptor(self):
        if self.descriptor is None:
            raise ValueError("operator has no serializable provenance "
                             "(raw matrices are never serialized)")
        return dict(self.descriptor)

    def to_json(self):
        return json.dumps(self.to_descriptor(), sort_keys=True)


# ---------------------------------------------------------------------------
# block samplers

def sample_use(m, M, field_name="real", seed=None):
    """Uniform Spherical Ensemble block: columns i.i.d. uniform on the unit
    sphere of R^m or C^m (Gaussian draw normalized to unit length)."""
    if m < 1 or M < 1:
        raise ValueError("need m >= 1 and M >= 1")
    rng = as_rng(seed)
    if field_name == "complex":
        g = rng.standard_normal((m, M)) + 1j * rng.standard_normal((m, M))
    elif field_name == "real":
        g = rng.standard_normal((m, M))
    else:
        raise ValueError(f"field must be 'real' or 'complex', got {field_name!r}")
    return g / np.linalg.norm(g, axis=0, keepdims=True)


def partial_dft_block(M, K):
    """m x M partial unitary DFT block: entry (i, t) = exp(2*pi*i*K_i*t/M)/sqrt(M)."""
    K = np.asarray(list(K), dtype=int)
    if K.size == 0 or len(set(K.tolist())) != K.size:
        raise ValueError("K must be nonempty with distinct entries")
    if K.min() < 0 or K.max() >= M:
        raise ValueError(f"K entries must lie in [0, {M})")
    t = np.arange(M)
    return np.exp(DFT_SIGN * 2j * np.pi * np.outer(K, t) / M) / np.sqrt(M)


def real_dft_matrix(M):
    """Orthonormal real trigonometric DFT basis: the constant row, then
    interleaved cos/sin rows at frequencies 1..floor((M-1)/2), plus the
    alternating-sign row when M is even."""
    t = np.arange(M)
    rows = [np.ones(M) / np.sqrt(M)]
    for k in range(1, (M - 1) // 2 + 1):
        rows.append(np.sqrt(2.0 / M) * np.cos(2 * np.pi * k * t / M))
        rows.append(np.sqrt(2.0 / M) * np.sin(2 * np.pi * k * t / M))
    if M % 2 == 0:
        rows.append((-1.0) ** t / np.sqrt(M))
    return np.array(rows)


def partial_real_dft_block(M, row_indices):
    """m x M block made of selected rows of the orthonormal real DFT basis."""
    rows = np.asarray(list(row_indices), dtype=int)
    if len(set(rows.tolist())) != rows.size:
        raise ValueError("row indices must be distinct")
    if rows.min() < 0 or rows.max() >= M:
        raise ValueError(f"row indices must lie in [0, {M})")
    return real_dft_matrix(M)[rows]


def min_column_minor(block):
    """Smallest |det| over all m x m column submatrices of an m x M block.
    Zero means the columns are NOT in general position."""
    block = np.asarray(block)
    m, M = block.shape
    sub = np.stack([block[:, c]
                    for c in itertools.combinations(range(M), m)])
    dets = np.linalg.det(sub)
    return float(np.abs(dets).min())


def columns_in_general_position(block, tol=1e-10):
    return min_column_minor(block) > tol


def general_position_rows(M, m, seed=None, tol=1e-9, max_tries=200,
                          include_dc=True):
    """Seeded search for m real-DFT rows whose block has columns in general
    position; some structured row subsets have exactly singular minors, so
    each draw is verified before being returned.

    include_dc keeps row 0 (the constant basis vector) in every draw.  With
    that row sampled, the l1 objective of the box problem is constant along
    the operator's null space, so tied optima resolve to failures and the
    empirical success rate follows the exact section-counting formula.
    """
    rng = as_rng(seed)
    for _ in range(max_tries):
        if include_dc:
            rows = np.concatenate(
                [[0], rng.choice(np.arange(1, M), size=m - 1, replace=False)])
            rows = np.sort(rows)
        else:
            rows = np.sort(rng.choice(M, size=m, replace=False))
        if min_column_minor(real_dft_matrix(M)[rows]) > tol:
            return rows
    raise RuntimeError(f"no general-position row set found for (M={M}, m={m})")


# ---------------------------------------------------------------------------
# operator constructors

def make_block_diagonal(blocks, B, repeated=False, descriptor=None):
    """Block-diagonal operator of size (B*m) x (B*M).

    repeated=True takes exactly one block applied B times; otherwise exactly
    B blocks of identical shape are required.
    """
    blocks = [np.asarray(b) for b in blocks]
    if repeated:
        if len(blocks) != 1:
            raise ValueError("repeated operator takes exactly one block")
    else:
        if len(blocks) != B:
            raise ValueError(f"distinct operator needs exactly B={B} blocks")
        shapes = {b.shape for b in blocks}
        if len(shapes) != 1:
            raise ValueError(f"blocks must share one shape, got {shapes}")
    m, M = blocks[0].shape
    kind = OperatorKind.BLOCK_DIAG_REPEATED if repeated \
        else OperatorKind.BLOCK_DIAG_DISTINCT
    return MeasurementOperator(kind=kind, rows=B * m, cols=B * M,
                               blocks=blocks, num_blocks=B,
                               descriptor=descriptor)


def aniso_sampler_2d(M, K1):
    """Anisotropic 2D Fourier sampler: exhaustive in k0, restricted to K1 in
    k1.  Maps a vectorized M x M array to the m*M selected 2D-DFT values.

    In C-order coordinates the dense matrix is kron(F_M, A1) with A1 the
    partial DFT block, so the Gram matrix is I_M (x) A1*A1.
    """
    A1 = partial_dft_block(M, K1)
    m = A1.shape[0]
    F = partial_dft_block(M, range(M))  # full unitary DFT
    dense = np.kron(F, A1)
    K1 = sorted(int(k) for k in K1)
    return MeasurementOperator(kind=OperatorKind.ANISO_2D, rows=m * M,
                               cols=M * M, blocks=[dense], num_blocks=1,
                               sample_set=K1,
                               descriptor={"builder": "aniso_2d", "M": M,
                                           "K1": K1})


def iso_sampler_2d(M, n, seed=None):
    """Isotropic 2D Fourier sampler: n distinct (k0, k1) pairs drawn
    uniformly at random; evaluates the unitary 2D DFT at those pairs."""
    if not (1 <= n <= M * M):
        raise ValueError(f"need 1 <= n <= M^2 = {M*M}")
    rng = as_rng(seed)
    flat = rng.choice(M * M, size=n, replace=False)
    pairs = [(int(f) // M, int(f) % M) for f in flat]
    t = np.arange(M)
    rows = np.empty((n, M * M), dtype=complex)
    for i, (k0, k1) in enumerate(pairs):
        row = np.exp(DFT_SIGN * 2j * np.pi * (np.add.outer(k0 * t, k1 * t)) / M) / M
        rows[i] = row.reshape(-1)
    seed_val = None if seed is None or isinstance(seed, np.random.Generator) \
        else int(seed)
    return MeasurementOperator(kind=OperatorKind.ISO_2D, rows=n, cols=M * M,
                               blocks=[rows], num_blocks=1, sample_set=pairs,
                               descriptor={"builder": "iso_2d", "M": M,
                                           "n": n, "seed": seed_val})


def rbuse(m, M, B, field_name="real", seed=None):
    blk = sample_use(m, M, field_name, seed)
    seed_val = None if isinstance(seed, np.random.Generator) else seed
    return make_block_diagonal([blk], B, repeated=True,
                               descriptor={"builder": "rbuse", "m": m, "M": M,
                                           "B": B, "field": field_name,
                                           "seed": seed_val})


def dbuse(m, M, B, field_name="real", seed=None):
    rng = as_rng(seed)
    blocks = [sample_use(m, M, field_name, rng) for _ in range(B)]
    seed_val = None if isinstance(seed, np.random.Generator) else seed
    return make_block_diagonal(blocks, B,
                               descriptor={"builder": "dbuse", "m": m, "M": M,
                                           "B": B, "field": field_name,
                                           "seed": seed_val})


def rbpft(M, K, B):
    """Repeated-block partial complex DFT."""
    K = sorted(int(k) for k in K)
    return make_block_diagonal([partial_dft_block(M, K)], B, repeated=True,
                               descriptor={"builder": "rbpft", "M": M,
                                           "B": B, "K": K})


def rb_real_dft(M, rows, B):
    """Repeated-block partial real (trigonometric) DFT."""
    rows = sorted(int(r) for r in rows)
    return make_block_diagonal([partial_real_dft_block(M, rows)], B,
                               repeated=True,
                               descriptor={"builder": "rb_real_dft", "M": M,
                                           "B": B, "rows": rows})


_BUILDERS = {
    "rbuse": lambda d: rbuse(d["m"], d["M"], d["B"], d["field"], d["seed"]),
    "dbuse": lambda d: dbuse(d["m"], d["M"], d["B"], d["field"], d["seed"]),
    "rbpft": lambda d: rbpft(d["M"], d["K"], d["B"]),
    "rb_real_dft": lambda d: rb_real_dft(d["M"], d["rows"], d["B"]),
    "aniso_2d": lambda d: aniso_sampler_2d(d["M"], d["K1"]),
    "iso_2d": lambda d: iso_sampler_2d(d["M"], d["n"], d["seed"]),
}


def operator_from_descriptor(descriptor):
    if isinstance(descriptor, str):
        descriptor = json.loads(descriptor)
    name = descriptor.get("builder")
    if name not in _BUILDERS:
        raise ValueError(f"unknown operator builder {name!r}")
    return _BUILDERS[name](descriptor)


# ---------------------------------------------------------------------------
# signal generation

def sample_signal(sizes, coeff_set, seed=None):
    """Regular-sparsity signal: per block, ell free positions chosen uniformly
    without replacement (independently across blocks).

    Free values: Uniform(0,1) for BOX01, half-normal for NONNEG, N(0,1) for
    REAL, standard complex Gaussian for COMPLEX.  Constrained entries are
    Bernoulli(1/2) over {0,1} for BOX01 and exactly 0 otherwise.
    """
    rng = as_rng(seed)
    ell, M, B = sizes.ell, sizes.M, sizes.B
    amb = coeff_set.ambient_dim
    vals = np.zeros((B, M, amb))
    if coeff_set is CoeffSet.BOX01:
        vals[:, :, 0] = (rng.random((B, M)) < 0.5).astype(float)
    for b in range(B):
        idx = rng.choice(M, size=ell, replace=False)
        if coeff_set is CoeffSet.BOX01:
            vals[b, idx, 0] = rng.random(ell)
        elif coeff_set is CoeffSet.NONNEG:
            vals[b, idx, 0] = np.abs(rng.standard_normal(ell))
        elif coeff_set is CoeffSet.REAL:
            vals[b, idx, 0] = rng.standard_normal(ell)
        else:
            vals[b, idx, :] = rng.standard_normal((ell, 2))
    return SignalVector(vals.reshape(-1), coeff_set, M, B)
