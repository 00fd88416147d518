"""Symmetric eigensolver contract shared by all spectral modules.

`eigs_smallest` returns the k algebraically smallest eigenvalues of a
symmetric operator, ascending, with per-eigenvalue residuals, and is
deterministic for a fixed seed. Operators are passed as `OperatorHandle`s
which expose a matvec and, when affordable, a dense assembly used both by
the direct path and by oracle cross-checks.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
import scipy.sparse
import scipy.sparse.linalg

from .errors import NonConvergenceError, ValidationError

SMALLEST_ALGEBRAIC = "smallest_algebraic"


@dataclass(frozen=True)
class EigenRequest:
    k: int
    tol: float = 1e-10
    max_iter: int = 5000
    which: str = SMALLEST_ALGEBRAIC
    seed: int = 0

    def __post_init__(self):
        if self.k < 0:
            raise ValidationError(f"k must be nonnegative, got {self.k}")
        if self.tol <= 0:
            raise ValidationError(f"tol must be positive, got {self.tol}")
        if self.which != SMALLEST_ALGEBRAIC:
            raise ValidationError(f"unsupported which={self.which!r}")


@dataclass(frozen=True, eq=False)
class SpectrumResult:
    """Ascending eigenvalues with residuals and provenance."""

    eigenvalues: np.ndarray
    residuals: np.ndarray
    grid_meta: dict = field(default_factory=dict)
    negative_count: int = 0
    truncated: bool = False
    vectors: np.ndarray | None = None  # columns, for inspection only

    def __post_init__(self):
        ev = np.asarray(self.eigenvalues, dtype=float)
        if ev.size > 1 and np.any(np.diff(ev) < 0):
            raise ValidationError("eigenvalues must be ascending")
        object.__setattr__(self, "eigenvalues", ev)
        object.__setattr__(self, "residuals", np.asarray(self.residuals, dtype=float))


class OperatorHandle:
    """Symmetric operator on R^n: matvec plus optional cheap assemblies."""

    def __init__(self, n, matvec, dense=None, tridiagonal=None, meta=None):
        self.n = n
        self._matvec = matvec
        self._dense = dense  # callable () -> ndarray, or ndarray
        self.tridiagonal = tridiagonal  # (diag, offdiag) or None
        self.meta = dict(meta or {})

    def matvec(self, x):
        return self._matvec(x)

    def dense(self) -> np.ndarray:
        if callable(self._dense):
            self._dense = self._dense()
        if self._dense is None:
            raise ValidationError("operator has no dense assembly")
        return self._dense

    def has_dense(self) -> bool:
        return self._dense is not None

    def as_linear_operator(self):
        return scipy.sparse.linalg.LinearOperator(
            (self.n, self.n), matvec=self._matvec, dtype=float
        )


def from_matrix(a, meta=None) -> OperatorHandle:
    a = np.asarray(a, dtype=float)
    return OperatorHandle(a.shape[0], lambda x: a @ x, dense=a, meta=meta)


def from_tridiagonal(diag, offdiag, meta=None) -> OperatorHandle:
    diag = np.asarray(diag, dtype=float)
    offdiag = np.asarray(offdiag, dtype=float)

    def matvec(x):
        y = diag * x
        y[:-1] += offdiag * x[1:]
        y[1:] += offdiag * x[:-1]
        return y

    def dense():
        return np.diag(diag) + np.diag(offdiag, 1) + np.diag(offdiag, -1)

    return OperatorHandle(
        diag.size, matvec, dense=dense, tridiagonal=(diag, offdiag), meta=meta
    )


def sturm_negative_count(diag, offdiag, shift: float = 0.0) -> int:
    """Eigenvalues of a symmetric tridiagonal matrix below `shift` (Sturm count)."""
    d = np.asarray(diag, dtype=float) - shift
    e2 = np.asarray(offdiag, dtype=float) ** 2
    count = 0
    q = d[0]
    if q < 0:
        count += 1
    for i in range(1, d.size):
        if q == 0.0:
            q = 1e-300
        q = d[i] - e2[i - 1] / q
        if q < 0:
            count += 1
    return count


def negative_count(op: OperatorHandle, tol: float = 0.0) -> int:
    """Exact count of eigenvalues < -tol of the assembled operator."""
    if op.tridiagonal is not None:
        d, e = op.tridiagonal
        return sturm_negative_count(d, e, shift=-tol)
    vals = scipy.linalg.eigvalsh(op.dense())
    return int(np.count_nonzero(vals < -tol))


def inertia_negative(matrix: np.ndarray, shift: float = 0.0) -> int:
    """Number of eigenvalues below `shift` via LDL^T inertia (no eigenvectors)."""
    a = matrix - shift * np.eye(matrix.shape[0]) if shift else matrix
    _, d, _ = scipy.linalg.ldl(a)
    # d is block diagonal with 1x1 and 2x2 blocks
    count = 0
    i = 0
    n = d.shape[0]
    while i < n:
        if i + 1 < n and abs(d[i + 1, i]) > 0:
            block = d[i : i + 2, i : i + 2]
            ev = np.linalg.eigvalsh(block)
            count += int(np.count_nonzero(ev < 0))
            i += 2
        else:
            if d[i, i] < 0:
                count += 1
            i += 1
    return count


def check_symmetry(op: OperatorHandle, rng=None, pairs: int = 4, tol: float = 1e-10):
    """Assert <u, Av> == <Au, v> on random pairs."""
    rng = rng or np.random.default_rng(0)
    for _ in range(pairs):
        u = rng.standard_normal(op.n)
        v = rng.standard_normal(op.n)
        left = float(u @ op.matvec(v))
        right = float(op.matvec(u) @ v)
        scale = max(abs(left), abs(right), 1.0)
        if abs(left - right) > tol * scale:
            raise ValidationError(
                f"operator is not symmetric: <u,Av>={left!r} vs <Au,v>={right!r}"
            )


def _residuals(op: OperatorHandle, vals, vecs) -> np.ndarray:
    res = np.empty(len(vals))
    for i, lam in enumerate(vals):
        v = vecs[:, i]
        res[i] = np.linalg.norm(op.matvec(v) - lam * v) / np.linalg.norm(v)
    return res


def eigs_smallest(
    op: OperatorHandle,
    req: EigenRequest,
    method: str = "auto",
    grid_meta: dict | None = None,
    keep_vectors: bool = False,
) -> SpectrumResult:
    """k algebraically smallest eigenvalues, ascending, residual-checked.

    method: "auto" (dense when available and affordable, else iterative),
    "dense", or "iterative".
    """
    meta = dict(grid_meta or op.meta)
    if req.k == 0:
        return SpectrumResult(
            eigenvalues=np.empty(0), residuals=np.empty(0), grid_meta=meta
        )
    if req.k > op.n:
        raise ValidationError(f"requested k={req.k} exceeds dimension n={op.n}")

    if method == "auto":
        affordable = op.tridiagonal is not None or (op.has_dense() and op.n <= 4096)
        method = "dense" if affordable else "iterative"

    if method == "dense":
        if op.tridiagonal is not None:
            d, e = op.tridiagonal
            vals, vecs = scipy.linalg.eigh_tridiagonal(
                d, e, select="i", select_range=(0, req.k - 1)
            )
            all_vals = scipy.linalg.eigvalsh_tridiagonal(d, e)
        else:
            a = op.dense()
            all_vals, all_vecs = scipy.linalg.eigh(a)
            vals = all_vals[: req.k]
            vecs = all_vecs[:, : req.k]
        neg = int(np.count_nonzero(all_vals < 0))
    elif method == "iterative":
        vals, vecs = _iterative_smallest(op, req)
        if op.tridiagonal is not None or (op.has_dense() and op.n <= 4096):
            neg = negative_count(op)
        else:
            neg = int(np.count_nonzero(vals < 0))
    else:
        raise ValidationError(f"unknown method {method!r}")

    order = np.argsort(vals)
    vals = np.asarray(vals)[order]
    vecs = vecs[:, order]
    res = _residuals(op, vals, vecs)
    bad = res > req.tol
    if method == "iterative" and np.any(bad):
        raise NonConvergenceError(
            f"{int(bad.sum())} of {req.k} eigenpairs above tol {req.tol}",
            achieved_residuals=res,
        )
    return SpectrumResult(
        eigenvalues=vals,
        residuals=res,
        grid_meta=meta,
        negative_count=neg,
        vectors=vecs if keep_vectors else None,
    )


def _iterative_smallest(op: OperatorHandle, req: EigenRequest):
    rng = np.random.default_rng(req.seed)
    v0 = rng.standard_normal(op.n)
    if op.tridiagonal is not None:
        # shift-invert below the spectrum: cheap banded factorization
        d, e = op.tridiagonal
        lower = float(np.min(d) - 2.0 * np.max(np.abs(e)) - 1.0)
        a = scipy.sparse.diags([e, d, e], [-1, 0, 1], format="csc")
        vals, vecs = scipy.sparse.linalg.eigsh(
            a, k=req.k, sigma=lower, which="LM", v0=v0,
            maxiter=req.max_iter, tol=0,
        )
        return vals, vecs
    lin = op.as_linear_operator()
    try:
        vals, vecs = scipy.sparse.linalg.eigsh(
            lin, k=req.k, which="SA", v0=v0,
            maxiter=req.max_iter, tol=min(req.tol * 1e-2, 1e-8),
            ncv=min(op.n, max(4 * req.k + 1, 40)),
        )
    except scipy.sparse.linalg.ArpackNoConvergence as exc:
        raise NonConvergenceError(
            f"ARPACK did not converge within {req.max_iter} iterations",
            achieved_residuals=None,
        ) from exc
    return vals, vecs
