"""Problem container for linear-matrix-inequality programs.

The canonical form is

    maximize    c . y
    subject to  F0_k + sum_i y_i F_i_k  >= 0   (one PSD block per k)
                A y = g

with symmetric coefficient matrices stored sparsely as upper-triangle
triplets.  ``var_bound`` optionally carries per-variable bounds valid for
every feasible point; the dual certificate uses them to turn residual
norms into a rigorous inflation of the bound.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Mapping, Sequence

import numpy as np


@dataclass(frozen=True)
class BlockSpec:
    """One PSD block: F(y) = F0 + sum_i y_i F_i, as upper-triangle triplets.

    ``var[t]`` is the variable index of triplet t, placing ``val[t]`` at
    position (row[t], col[t]) and mirrored at (col[t], row[t]).
    """

    size: int
    var: np.ndarray
    row: np.ndarray
    col: np.ndarray
    val: np.ndarray
    f0: np.ndarray | None = None

    def __post_init__(self) -> None:
        nnz = len(self.var)
        if not (len(self.row) == len(self.col) == len(self.val) == nnz):
            raise ValueError("triplet arrays must share one length")
        if nnz and (np.min(self.row) < 0 or np.max(self.col) >= self.size):
            raise ValueError("triplet indices out of range")
        if nnz and np.any(self.row > self.col):
            raise ValueError("triplets must be upper-triangle (row <= col)")
        if self.f0 is not None:
            if self.f0.shape != (self.size, self.size):
                raise ValueError("f0 shape mismatch")
            if np.max(np.abs(self.f0 - self.f0.T)) > 1e-12:
                raise ValueError("f0 must be symmetric")
        for arr in (self.var, self.row, self.col, self.val):
            arr.setflags(write=False)
        if self.f0 is not None:
            self.f0.setflags(write=False)

    def variables(self) -> np.ndarray:
        return np.unique(self.var)

    def matrix(self, y: np.ndarray, include_f0: bool = True) -> np.ndarray:
        """Dense symmetric F(y), optionally without the constant term."""
        m = np.zeros((self.size, self.size))
        np.add.at(m, (self.row, self.col), self.val * y[self.var])
        diag = np.diag(m).copy()
        m = m + m.T
        m[np.diag_indices_from(m)] = diag
        if include_f0 and self.f0 is not None:
            m = m + self.f0
        return m

    def inner_products(self, mat: np.ndarray, num_vars: int) -> np.ndarray:
        """Vector of <F_i, mat> over all variables (mat symmetric)."""
        weights = np.where(self.row == self.col, 1.0, 2.0)
        contrib = weights * self.val * mat[self.row, self.col]
        out = np.zeros(num_vars)
        np.add.at(out, self.var, contrib)
        return out

    def coefficient_scale(self) -> float:
        top = float(np.max(np.abs(self.val))) if len(self.val) else 0.0
        if self.f0 is not None and self.f0.size:
            top = max(top, float(np.max(np.abs(self.f0))))
        return top


def block_from_dense(size: int, mats: Mapping[int, np.ndarray], f0: np.ndarray | None = None) -> BlockSpec:
    """Convenience constructor from dense symmetric coefficient matrices."""
    var, row, col, val = [], [], [], []
    for i, m in sorted(mats.items()):
        if m.shape != (size, size) or np.max(np.abs(m - m.T)) > 1e-12:
            raise ValueError(f"coefficient matrix for variable {i} must be symmetric {size}x{size}")
        rr, cc = np.nonzero(np.triu(np.abs(m) > 0))
        var.extend([i] * len(rr))
        row.extend(rr.tolist())
        col.extend(cc.tolist())
        val.extend(m[rr, cc].tolist())
    return BlockSpec(
        size=size,
        var=np.asarray(var, dtype=np.int64),
        row=np.asarray(row, dtype=np.int64),
        col=np.asarray(col, dtype=np.int64),
        val=np.asarray(val, dtype=float),
        f0=None if f0 is None else np.asarray(f0, dtype=float),
    )


@dataclass(frozen=True)
class SDPProblem:
    """maximize c.y subject to block LMIs and linear equalities."""

    num_vars: int
    blocks: tuple[BlockSpec, ...]
    objective: np.ndarray
    eq_lhs: np.ndarray | None = None
    eq_rhs: np.ndarray | None = None
    var_bound: np.ndarray | None = None
    metadata: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if len(self.objective) != self.num_vars:
            raise ValueError("objective length != num_vars")
        if not self.blocks:
            raise ValueError("problem needs at least one PSD block")
        covered = np.zeros(self.num_vars, dtype=bool)
        for blk in self.blocks:
            if len(blk.var) and np.max(blk.var) >= self.num_vars:
                raise ValueError("block references variable out of range")
            covered[blk.var] = True
        if not covered.all():
            missing = int(np.flatnonzero(~covered)[0])
            raise ValueError(
                f"variable {missing} appears in no PSD block; such problems "
                f"have a singular interior-point system"
            )
        if (self.eq_lhs is None) != (self.eq_rhs is None):
            raise ValueError("equality lhs and rhs must come together")
        if self.eq_lhs is not None:
            if self.eq_lhs.shape != (len(self.eq_rhs), self.num_vars):
                raise ValueError("equality shape mismatch")
            self.eq_lhs.setflags(write=False)
            self.eq_rhs.setflags(write=False)
        if self.var_bound is not None and len(self.var_bound) != self.num_vars:
            raise ValueError("var_bound length != num_vars")
        self.objective.setflags(write=False)
        if self.var_bound is not None:
            self.var_bound.setflags(write=False)

    @property
    def num_equalities(self) -> int:
        return 0 if self.eq_rhs is None else len(self.eq_rhs)

    def coefficient_scale(self) -> float:
        """1 + largest coefficient magnitude; the solver's natural scale."""
        top = float(np.max(np.abs(self.objective))) if self.num_vars else 0.0
        for blk in self.blocks:
            top = max(top, blk.coefficient_scale())
        if self.eq_lhs is not None and self.eq_lhs.size:
            top = max(top, float(np.max(np.abs(self.eq_lhs))))
            top = max(top, float(np.max(np.abs(self.eq_rhs))))
        return 1.0 + top

    def variable_components(self) -> list[np.ndarray]:
        """Partition variables into groups not sharing any PSD block.

        The Schur complement of the interior-point system is block
        diagonal over these groups, which is what keeps multi-branch
        guessing programs tractable.
        """
        parent = np.arange(self.num_vars)

        def find(i: int) -> int:
            while parent[i] != i:
                parent[i] = parent[parent[i]]
                i = parent[i]
            return i

        for blk in self.blocks:
            vs = blk.variables()
            if len(vs) < 2:
                continue
            root = find(int(vs[0]))
            for v in vs[1:]:
                r = find(int(v))
                if r != root:
                    parent[r] = root
        groups: dict[int, list[int]] = {}
        for i in range(self.num_vars):
            groups.setdefault(find(i), []).append(i)
        return [np.asarray(g, dtype=np.int64) for g in sorted(groups.values())]
