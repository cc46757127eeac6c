"""Finite-difference magnetic Hamiltonians on 2D rectangles and exact counts.

Hopping terms carry Peierls phases, so gauge transforms act on the lattice
by exact diagonal unitary conjugation.  Eigenvalues below a shift are
counted through Sylvester's law of inertia: a sparse LU factorisation of
``H - tau`` with symmetric ordering and no pivoting is an ``L D L^*``
factorisation, and the number of negative pivots is the count.
"""
from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spl

from .errors import DomainError, ResourceCapExceeded

MAX_NODES_PER_AXIS = 256
RESOLUTION_LIMIT = 0.2


@dataclass(frozen=True)
class GridSpec:
    """Tensor grid on ``[x0, x0 + Lx] x [y0, y0 + Ly]``.

    Dirichlet grids place ``n`` interior nodes at spacing ``L / (n + 1)``;
    periodic grids place ``n`` nodes at spacing ``L / n`` starting at the
    lower corner.
    """

    L: tuple
    n: tuple
    boundary: str = "dirichlet"
    origin: tuple = (0.0, 0.0)

    def __post_init__(self):
        L = tuple(float(v) for v in np.broadcast_to(np.asarray(self.L, float), (2,)))
        n = tuple(int(v) for v in np.broadcast_to(np.asarray(self.n), (2,)))
        object.__setattr__(self, "L", L)
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "origin", tuple(float(v) for v in self.origin))
        if self.boundary not in ("dirichlet", "periodic"):
            raise ValueError("boundary must be 'dirichlet' or 'periodic'")
        if min(L) <= 0 or min(n) < 2:
            raise ValueError("need positive side lengths and at least 2 nodes per axis")
        if max(n) > MAX_NODES_PER_AXIS:
            raise ResourceCapExceeded(
                f"{max(n)} nodes per axis exceeds the cap of {MAX_NODES_PER_AXIS}")

    @property
    def periodic(self):
        return self.boundary == "periodic"

    @property
    def spacing(self):
        if self.periodic:
            return tuple(L / n for L, n in zip(self.L, self.n))
        return tuple(L / (n + 1) for L, n in zip(self.L, self.n))

    def axes(self):
        off = 0 if self.periodic else 1
        return [o + (np.arange(n) + off) * d for o, n, d in zip(self.origin, self.n, self.spacing)]

    def nodes(self):
        X, Y = np.meshgrid(*self.axes(), indexing="ij")
        return np.stack([X, Y], axis=-1)

    @property
    def size(self):
        return self.n[0] * self.n[1]

    def resolution(self, mu, h, max_field):
        """``delta^2 mu max|F| / h`` for the coarser axis."""
        return max(self.spacing) ** 2 * mu * max_field / h


@dataclass(frozen=True)
class SparseHermitian:
    """Assembled Hamiltonian in CSC storage; Hermitian by construction."""

    matrix: sp.csc_matrix = field(repr=False)
    grid: GridSpec
    norm: float
    blocks: int = 1

    @property
    def dimension(self):
        return self.matrix.shape[0]

    def dense(self):
        return self.matrix.toarray()


def _node_field(spec, pts):
    F = spec.tensor_at(pts)
    return F[..., 0, 1]


def assemble_magnetic_2d(spec, grid: GridSpec, chi=None, check_flux=True) -> SparseHermitian:
    """Peierls discretisation of ``sum (h D_j - mu A_j) g^{jj} (h D_j - mu A_j) + V``.

    The bond from node p to its neighbour ``p + delta e_j`` carries
    ``-(h/delta)^2 g^{jj}(mid) exp(-i mu delta A_j(mid) / h)``; the diagonal
    holds the sum of the bond weights plus V.  ``chi`` (a callable or node
    array) adds the node-sampled gauge transform ``exp(i mu (chi_p - chi_q)/h)``
    to every bond.  Pauli operators are assembled as the two spin blocks
    ``H -+ mu h F``.
    """
    if spec.dimension != 2:
        raise DomainError("the lattice assembly is two-dimensional")
    if spec.kind == "dirac":
        raise DomainError("Dirac operators are not discretised on the lattice")
    metric = spec.metric
    if not metric.is_diagonal:
        raise DomainError("the lattice assembly supports diagonal metrics only")
    mu, h = spec.mu, spec.h
    nx, ny = grid.n
    N = nx * ny
    pts = grid.nodes()
    idx = np.arange(N).reshape(nx, ny)
    dlt = grid.spacing
    if chi is None:
        chi_nodes = None
    elif callable(chi):
        chi_nodes = np.asarray(chi(pts), float)
    else:
        chi_nodes = np.asarray(chi, float).reshape(nx, ny)

    has_field = spec.vector_potential is not None
    if has_field:
        Fn = _node_field(spec, pts)
        fmax = float(np.max(np.abs(Fn)))
        res = grid.resolution(mu, h, fmax)
        if res > RESOLUTION_LIMIT:
            warnings.warn(f"grid under-resolves the magnetic length (delta^2 mu |F| / h = {res:.3g})",
                          RuntimeWarning, stacklevel=2)
    complex_needed = has_field or chi_nodes is not None

    diag = spec.potential_at(pts).astype(float).ravel().copy()
    rows, cols, vals = [], [], []
    for axis in (0, 1):
        d = dlt[axis]
        step = np.zeros(2)
        step[axis] = d
        t = h * h / (d * d)
        # forward bonds inside the box
        sl_p = [slice(None), slice(None)]
        sl_q = [slice(None), slice(None)]
        sl_p[axis] = slice(0, grid.n[axis] - 1)
        sl_q[axis] = slice(1, grid.n[axis])
        p = idx[tuple(sl_p)].ravel()
        q = idx[tuple(sl_q)].ravel()
        mids = pts[tuple(sl_p)].reshape(-1, 2) + 0.5 * step
        bonds = [(p, q, mids, None)]
        if grid.periodic:
            sl_p[axis] = slice(grid.n[axis] - 1, grid.n[axis])
            sl_q[axis] = slice(0, 1)
            pw = idx[tuple(sl_p)].ravel()
            qw = idx[tuple(sl_q)].ravel()
            mids_w = pts[tuple(sl_p)].reshape(-1, 2) + 0.5 * step
            bonds.append((pw, qw, mids_w, axis))
        # diagonal: every node has two bonds per axis (boundary bonds for Dirichlet)
        lo = pts - 0.5 * step
        hi = pts + 0.5 * step
        g_lo = metric.diagonal_at(lo, axis)
        g_hi = metric.diagonal_at(hi, axis)
        diag += (t * (g_lo + g_hi)).ravel()
        for p, q, mids, wrap_axis in bonds:
            g = metric.diagonal_at(mids, axis)
            phase = np.zeros(p.size)
            if has_field:
                A = spec.vector_potential_at(mids)[:, axis]
                phase -= mu * d * A / h
                if wrap_axis is not None:
                    c = spec.vector_potential.period_gauge(wrap_axis, grid.L[wrap_axis])
                    target = pts.reshape(-1, 2)[q] + grid.L[wrap_axis] * np.eye(2)[wrap_axis]
                    phase += mu * (target @ c) / h
            if chi_nodes is not None:
                cf = chi_nodes.ravel()
                phase += mu * (cf[p] - cf[q]) / h
            v = -t * g * (np.exp(1j * phase) if complex_needed else 1.0)
            rows.append(p)
            cols.append(q)
            vals.append(v)

    if grid.periodic and has_field and check_flux:
        c0 = spec.vector_potential.period_gauge(0, grid.L[0])
        c1 = spec.vector_potential.period_gauge(1, grid.L[1])
        flux = mu / h * (c0[1] * grid.L[1] - c1[0] * grid.L[0]) / (2 * math.pi)
        if abs(flux - round(flux)) > 1e-9 * max(1.0, abs(flux)):
            raise DomainError(f"torus flux {abs(flux):.6g} (in units of 2 pi h / mu) is not an integer")

    dtype = complex if complex_needed else float
    U = sp.coo_matrix((np.concatenate(vals).astype(dtype),
                       (np.concatenate(rows), np.concatenate(cols))), shape=(N, N)).tocsr()
    H = (U + U.conj().T).tocsr()
    blocks = 1
    if spec.kind == "pauli":
        zee = mu * h * (Fn.ravel() if has_field else np.zeros(N))
        H = sp.block_diag([H + sp.diags(diag - zee), H + sp.diags(diag + zee)])
        blocks = 2
    else:
        H = H + sp.diags(diag)
    H = sp.csc_matrix(H)
    norm = float(spl.norm(H, 1))
    return SparseHermitian(H, grid, norm, blocks)


@dataclass(frozen=True)
class InertiaResult:
    tau: float
    count: int
    pivot_margin: float
    jitter: float = 0.0
    attempts: int = 1


def _factor_count(A):
    lu = spl.splu(A, permc_spec="MMD_AT_PLUS_A", diag_pivot_thresh=0.0,
                  options=dict(SymmetricMode=True))
    if not np.array_equal(lu.perm_r, lu.perm_c):
        return None, 0.0
    piv = lu.U.diagonal()
    mag = np.abs(piv)
    if mag.min() == 0.0:
        return None, 0.0
    return int(np.sum(piv.real < 0)), float(mag.min() / mag.max())


def count_below_2d(H: SparseHermitian, tau, seed=0, max_attempts=6) -> InertiaResult:
    """Number of eigenvalues of ``H`` below ``tau`` from the inertia of ``H - tau``.

    When the factorisation pivots off the diagonal or meets a zero pivot,
    the shift is moved by a seeded random multiple of ``1e-12 * ||H||`` and
    the attempt repeated; the applied jitter is reported.
    """
    tau = float(tau)
    rng = np.random.default_rng(seed)
    I = sp.identity(H.dimension, format="csc", dtype=H.matrix.dtype)
    jitter = 0.0
    for attempt in range(1, max_attempts + 1):
        A = (H.matrix - (tau + jitter) * I).tocsc()
        try:
            count, margin = _factor_count(A)
        except RuntimeError:
            count, margin = None, 0.0
        if count is not None:
            return InertiaResult(tau, count, margin, jitter, attempt)
        jitter = 1e-12 * H.norm * 10.0 ** (attempt - 1) * rng.uniform(-1.0, 1.0)
    raise ArithmeticError(f"inertia factorisation failed at tau = {tau!r} after {max_attempts} attempts")


def count_ladder(H: SparseHermitian, taus, threads=1, seed=0) -> list[InertiaResult]:
    """Counts for a list of shifts, in input order; shifts run in parallel."""
    taus = [float(t) for t in taus]
    if threads > 1 and len(taus) > 1:
        with ThreadPoolExecutor(threads) as pool:
            return list(pool.map(lambda t: count_below_2d(H, t, seed), taus))
    return [count_below_2d(H, t, seed) for t in taus]


def lowest_eigenvalues_2d(H: SparseHermitian, k=1) -> np.ndarray:
    """The ``k`` smallest eigenvalues, by shift-invert below the Gershgorin bound."""
    M = H.matrix
    if H.dimension <= 400:
        return np.linalg.eigvalsh(M.toarray())[:k]
    absrow = np.asarray(abs(M).sum(axis=1)).ravel()
    dg = M.diagonal().real
    lower = float(np.min(2 * dg - absrow)) - 1.0
    vals = spl.eigsh(M, k=k, sigma=lower, which="LM", return_eigenvectors=False)
    return np.sort(vals.real)


# ------------------------------------------------------------ experiments

@dataclass
class LandauDegeneracyReport:
    B: float
    L: float
    n: int
    boundary: str
    counts: np.ndarray
    expected: float

    @property
    def ratios(self):
        return self.counts / self.expected

    def rows(self):
        lv = np.arange(self.counts.size)
        return np.column_stack([lv, self.counts, np.full(lv.size, self.expected), self.ratios])

    columns = ("level", "count", "expected", "ratio")


def _landau_spec(B, V=None):
    from .fields import Constant
    from .gauge import Landau
    from .model import ModelSpec
    return ModelSpec(2, Constant(0.0) if V is None else V, Landau(B))


def landau_degeneracy_experiment(B=1.0, L=20.0, n=256, levels=1, boundary="dirichlet",
                                 threads=1, dense=False) -> LandauDegeneracyReport:
    """Eigenvalue counts in the windows ``(2k B, (2k + 2) B)`` against ``B L^2 / 2 pi``.

    Unit ``mu`` and ``h``; the field is constant.  ``dense`` uses a full
    eigensolve instead of inertia (small grids only).
    """
    spec = _landau_spec(B)
    grid = GridSpec((L, L), (n, n), boundary)
    H = assemble_magnetic_2d(spec, grid)
    edges = [2.0 * k * B for k in range(levels + 1)]
    if dense:
        ev = np.linalg.eigvalsh(H.dense())
        below = [int(np.sum(ev < e)) for e in edges]
    else:
        below = [0] + [r.count for r in count_ladder(H, edges[1:], threads)]
    counts = np.diff(below)
    return LandauDegeneracyReport(B, L, n, boundary, counts, B * L * L / (2 * math.pi))


@dataclass
class AccumulationReport:
    B: float
    c: float
    m: float
    eta: np.ndarray
    counts: np.ndarray
    formula: np.ndarray
    floor_count: int

    @property
    def ratios(self):
        with np.errstate(divide="ignore", invalid="ignore"):
            return self.counts / self.formula

    def rows(self):
        return np.column_stack([self.eta, self.counts, self.formula, self.ratios])

    columns = ("eta", "count", "formula", "ratio")


def accumulation_experiment(B=1.0, c=0.3, m=-1.0, eta_grid=np.linspace(0.03, 0.15, 9),
                            L=20.0, n=256, threads=1, formula_kw=None) -> AccumulationReport:
    """Eigenvalues just below the lowest Landau level for ``V = -c <x - x0>^{2m}``.

    ``x0`` is the centre of the box.  The numerical ``N(eta)`` counts
    eigenvalues in ``(B - c - margin, B - eta)``; the formula comes from the
    Landau eta-count with the field intensity ``B`` at infinity.
    """
    from .fields import PowerLaw
    from .model import ModelSpec
    from .gauge import Landau
    from .weyl import eta_count_landau
    if not m < 0:
        raise DomainError("the accumulation experiment needs a decaying potential (m < 0)")
    if not 0 < c < 2 * B:
        raise DomainError(f"levels overlap: sup|V| = {c:g} reaches the gap 2B = {2 * B:g}")
    x0 = (0.5 * L, 0.5 * L)
    V = PowerLaw(-c, 2.0 * m, "bracket", x0)
    spec = ModelSpec(2, V, Landau(B))
    grid = GridSpec((L, L), (n, n), "dirichlet")
    H = assemble_magnetic_2d(spec, grid)
    eta_grid = np.asarray(eta_grid, float)
    floor = B - c - 0.5 * min(B, c)
    res = count_ladder(H, [floor] + [B - e for e in eta_grid], threads)
    floor_count = res[0].count
    if floor_count:
        raise ArithmeticError(
            f"{floor_count} eigenvalues below B - sup|V|; the lowest level is not isolated")
    counts = np.array([r.count - floor_count for r in res[1:]])
    cont = ModelSpec(2, PowerLaw(-c, 2.0 * m, "bracket"), Landau(B))
    kw = dict(formula_kw or {})
    formula = np.array([eta_count_landau(cont, [(1,)], e, [B], **kw) if e < c else 0.0
                        for e in eta_grid])
    return AccumulationReport(B, c, m, eta_grid, counts, formula, floor_count)


__all__ = [
    "GridSpec", "SparseHermitian", "InertiaResult", "assemble_magnetic_2d", "count_below_2d",
    "count_ladder", "lowest_eigenvalues_2d", "LandauDegeneracyReport",
    "landau_degeneracy_experiment", "AccumulationReport", "accumulation_experiment",
    "MAX_NODES_PER_AXIS",
]
