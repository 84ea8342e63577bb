"""Assembly of the interior-point Schur complement.

For one PSD block with coefficient matrices F_p the Schur matrix is
H[p, q] = tr(F_p X F_q S^-1).  With the sparse triplet representation this
is a sum over triplet pairs of products of four gathered matrix entries;
the kernel iterates rows of H in parallel, each row owned by one thread,
filling the upper triangle (triplets are sorted by variable, so the inner
loop can start at the row's own run).  A chunked numpy path covers
environments where the JIT is unavailable.
"""

from __future__ import annotations

import numpy as np

try:
    from numba import njit, prange

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        def wrap(f):
            return f

        return wrap

    prange = range


@njit(parallel=True, cache=True)
def _schur_kernel(H, I, J, W, VAR, start, X, V):  # pragma: no cover - jitted
    m = start.shape[0] - 1
    for p in prange(m):
        t0 = start[p]
        t1 = start[p + 1]
        if t0 == t1:
            continue
        for t in range(t0, t1):
            it = I[t]
            jt = J[t]
            wt = W[t]
            Xi = X[it]
            Xj = X[jt]
            Vi = V[it]
            Vj = V[jt]
            for s in range(t0, I.shape[0]):
                g = wt * W[s] * (
                    Xj[I[s]] * Vi[J[s]]
                    + Xj[J[s]] * Vi[I[s]]
                    + Xi[I[s]] * Vj[J[s]]
                    + Xi[J[s]] * Vj[I[s]]
                )
                H[p, VAR[s]] += g


def _schur_numpy_block(H, I, J, W, VAR, start, X, V):
    """Vectorised equivalent of the jitted kernel (upper-triangle fill)."""
    T = len(I)
    if T == 0:
        return
    XJ = X[J]
    XI = X[I]
    VJ = V[J]
    VI = V[I]
    m = H.shape[0]
    chunk = max(16, int(8e6 / T))
    for s0 in range(0, T, chunk):
        s1 = min(T, s0 + chunk)
        Is, Js = I[s0:s1], J[s0:s1]
        G = XJ[:, Is] * VI[:, Js]
        G += XJ[:, Js] * VI[:, Is]
        G += XI[:, Is] * VJ[:, Js]
        G += XI[:, Js] * VJ[:, Is]
        G *= W[:, None]
        G *= W[s0:s1][None, :]
        # Match the kernel's upper-triangle semantics: keep pairs with
        # VAR[s] >= VAR[t] (the within-variable square survives intact).
        G *= VAR[s0:s1][None, :] >= VAR[:, None]
        rows = np.zeros((m, s1 - s0))
        np.add.at(rows, VAR, G)
        np.add.at(H.T, VAR[s0:s1], rows.T)


class BlockKernel:
    """Per-block static data for Schur assembly within one variable group.

    Triplets are re-indexed to group-local variables and sorted so each
    local variable owns a contiguous run; ``accumulate`` then adds the
    block's contribution to the group Schur matrix (upper triangle).
    """

    def __init__(self, block, local_of_global: dict[int, int], group_size: int):
        local = np.asarray([local_of_global[int(v)] for v in block.var], dtype=np.int64)
        order = np.argsort(local, kind="stable")
        self.row = np.ascontiguousarray(block.row[order])
        self.col = np.ascontiguousarray(block.col[order])
        self.var_local = np.ascontiguousarray(local[order])
        kappa = np.where(self.row == self.col, 0.5, 1.0)
        self.weight = np.ascontiguousarray(block.val[order] * kappa)
        self.start = np.searchsorted(
            self.var_local, np.arange(group_size + 1)
        ).astype(np.int64)
        self.use_numba = HAVE_NUMBA and len(self.row) >= 64

    def accumulate(self, H: np.ndarray, X: np.ndarray, Sinv: np.ndarray) -> None:
        """Add this block's tr(F_p X F_q S^-1) into H (upper triangle only)."""
        X = np.ascontiguousarray(X)
        Sinv = np.ascontiguousarray(Sinv)
        if self.use_numba:
            _schur_kernel(
                H, self.row, self.col, self.weight, self.var_local, self.start, X, Sinv
            )
        else:
            _schur_numpy_block(
                H, self.row, self.col, self.weight, self.var_local, self.start, X, Sinv
            )


def complete_upper(H: np.ndarray) -> None:
    """In-place mirror of the upper triangle onto the lower."""
    H += np.triu(H, 1).T
