"""Sparse SDPA text format, for cross-checking against external solvers.

The mapping writes our maximization

    max c.y   s.t.  F0_k + sum_i y_i F_i_k >= 0

as the SDPA primal ``min (-c).x  s.t.  sum_i x_i F_i - (-F0) >= 0`` with
x identified with y, so an external solver's primal optimum is the
negated objective at our maximizer.  Equality rows cannot be expressed
directly; each row a.y = g becomes the pair a.y >= g - eta and
-a.y >= -g - eta in one diagonal block, with a small eta > 0 keeping a
strictly feasible interior (documented in the header comment).
"""

from __future__ import annotations

import numpy as np

from .problem import BlockSpec, SDPProblem

EQUALITY_RELAXATION = 1e-9


def write_sdpa(problem: SDPProblem, path: str, eta: float = EQUALITY_RELAXATION) -> None:
    lines: list[str] = []
    comment = problem.metadata.get("description", "") if problem.metadata else ""
    lines.append(f'"{comment}"')
    lines.append(
        '"maximize c.y with F0 + sum y_i F_i >= 0; SDPA objective is -c; '
        f'equalities relaxed to inequality pairs with eta={eta:g}"'
    )
    m = problem.num_vars
    p = problem.num_equalities
    nblocks = len(problem.blocks) + (1 if p else 0)
    lines.append(str(m))
    lines.append(str(nblocks))
    sizes = [str(b.size) for b in problem.blocks]
    if p:
        sizes.append(str(-2 * p))
    lines.append(" ".join(sizes))
    lines.append(" ".join(repr(-float(ci)) for ci in problem.objective))

    def entry(mat_no: int, blk_no: int, i: int, j: int, value: float) -> None:
        if value != 0.0:
            lines.append(f"{mat_no} {blk_no} {i + 1} {j + 1} {value!r}")

    for bi, blk in enumerate(problem.blocks, start=1):
        if blk.f0 is not None:
            rows, cols = np.nonzero(np.triu(blk.f0 != 0.0))
            for i, j in zip(rows, cols):
                entry(0, bi, int(i), int(j), -float(blk.f0[i, j]))
        for v, i, j, val in zip(blk.var, blk.row, blk.col, blk.val):
            entry(int(v) + 1, bi, int(i), int(j), float(val))
    if p:
        bi = nblocks
        for row in range(p):
            g = float(problem.eq_rhs[row])
            entry(0, bi, 2 * row, 2 * row, g - eta)
            entry(0, bi, 2 * row + 1, 2 * row + 1, -g - eta)
            for v in np.flatnonzero(problem.eq_lhs[row]):
                a = float(problem.eq_lhs[row, v])
                entry(int(v) + 1, bi, 2 * row, 2 * row, a)
                entry(int(v) + 1, bi, 2 * row + 1, 2 * row + 1, -a)
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def _tokenize(line: str) -> list[str]:
    for ch in ",(){}":
        line = line.replace(ch, " ")
    return line.split()


def read_sdpa(path: str) -> SDPProblem:
    """Parse a sparse SDPA file into the native maximization form.

    Diagonal blocks (negative sizes) expand to scalar PSD blocks.  The
    reader inverts the writer's sign convention, so write/read round-trips
    reproduce the same problem up to the equality relaxation.
    """
    header: list[str] = []
    entries: list[tuple[int, int, int, int, float]] = []
    with open(path) as fh:
        for raw in fh:
            line = raw.strip()
            if not line or line.startswith(("*", '"')):
                continue
            header.append(line)
    if len(header) < 4:
        raise ValueError(f"{path}: truncated SDPA file")
    m = int(_tokenize(header[0])[0])
    nblocks = int(_tokenize(header[1])[0])
    sizes = [int(tok) for tok in _tokenize(header[2])[:nblocks]]
    objective = np.array([float(tok) for tok in _tokenize(header[3])[:m]])
    for line in header[4:]:
        toks = _tokenize(line)
        if len(toks) != 5:
            raise ValueError(f"{path}: bad entry line {line!r}")
        entries.append(
            (int(toks[0]), int(toks[1]), int(toks[2]), int(toks[3]), float(toks[4]))
        )

    # Expand diagonal blocks into scalar blocks, dense blocks stay whole.
    block_offsets: list[tuple[int, int, bool]] = []  # (first index, size, diagonal?)
    expanded_sizes: list[int] = []
    for size in sizes:
        if size < 0:
            block_offsets.append((len(expanded_sizes), -size, True))
            expanded_sizes.extend([1] * (-size))
        else:
            block_offsets.append((len(expanded_sizes), size, False))
            expanded_sizes.append(size)

    f0: dict[int, dict[tuple[int, int], float]] = {}
    trip: dict[int, list[tuple[int, int, int, float]]] = {}
    for mat_no, blk_no, i, j, value in entries:
        first, size, diagonal = block_offsets[blk_no - 1]
        if diagonal:
            if i != j:
                raise ValueError(f"{path}: off-diagonal entry in diagonal block")
            target, ii, jj = first + i - 1, 0, 0
        else:
            target, ii, jj = first, min(i, j) - 1, max(i, j) - 1
        if mat_no == 0:
            f0.setdefault(target, {})[(ii, jj)] = -value  # undo writer's negation
        else:
            trip.setdefault(target, []).append((mat_no - 1, ii, jj, value))

    blocks = []
    for bi, size in enumerate(expanded_sizes):
        triples = trip.get(bi, [])
        f0_mat = None
        if bi in f0:
            f0_mat = np.zeros((size, size))
            for (i, j), value in f0[bi].items():
                f0_mat[i, j] = value
                f0_mat[j, i] = value
        blocks.append(
            BlockSpec(
                size=size,
                var=np.array([t[0] for t in triples], dtype=np.int64),
                row=np.array([t[1] for t in triples], dtype=np.int64),
                col=np.array([t[2] for t in triples], dtype=np.int64),
                val=np.array([t[3] for t in triples], dtype=float),
                f0=f0_mat,
            )
        )
    # Scalar blocks created for padding with no variables would be rejected
    # by the problem validator; attach them to nothing by dropping empties
    # with a zero f0 (they constrain nothing).
    kept = [
        b for b in blocks
        if len(b.var) or (b.f0 is not None and np.any(b.f0 != 0.0))
    ]
    return SDPProblem(
        num_vars=m,
        blocks=tuple(kept),
        objective=-objective,
        metadata={"description": f"read from {path}"},
    )
