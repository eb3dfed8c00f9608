"""Infinite-algorithm DMRG for pairing Hamiltonians.

Levels are split at the Fermi index into a hole side and a particle side.
Both blocks grow outward one level per iteration (two on one side once the
other side runs out of levels, which only happens away from half filling),
the superblock ground state is found in a fixed total-pair sector, and each
block is truncated to at most m states selected by its reduced density
matrix.  A full run takes exactly N/2 iterations.

Memory layout: a truncated block stores two explicit matrices per level
(pair creation and number; annihilation is the transpose on demand) plus
its block Hamiltonian.  A freshly grown block stores only its enlarged
Hamiltonian next to the untouched core block; enlarged per-level operators
are produced on demand as Kronecker factors and never held simultaneously.
This keeps stored per-level operator entries within the 3*m^2*N budget
(counted in the 3-per-level convention) with the block Hamiltonians as the
only constant overhead; solver work arrays are accounted separately.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.linalg
import scipy.sparse.linalg

from .errors import (
    DimensionMismatch,
    EmptySector,
    InfeasibleTarget,
    InvariantViolation,
    NoConvergence,
    NotNormalized,
    OddN,
)
from .model import PairingModel

_SITE_RAISE = np.array([[0.0, 0.0], [1.0, 0.0]])
_SITE_NUMBER = np.array([[0.0, 0.0], [0.0, 2.0]])

#: Singular values below this relative cutoff are dropped when the
#: cross-block coupling matrices are factored into low-rank products.
_SVD_CUT = 1e-13

#: Sector dimension at or below which the superblock is solved densely.
_DENSE_SECTOR = 64

#: Allowance for block Hamiltonians on top of the per-level operator
#: budget: two enlarged blocks at dim 4m (double growth) plus slack.
MEMORY_OVERHEAD_FACTOR = 24


class Block:
    """A set of levels in an explicit truncated basis.

    Stores pair-number sector labels, the block Hamiltonian and, per level,
    the projected pair-creation and number operators (annihilation is the
    transpose).  Instances are treated as immutable.
    """

    def __init__(self, levels, sectors, h, raise_ops, number_ops):
        self.levels = tuple(int(x) for x in levels)
        self.sectors = np.asarray(sectors, dtype=int)
        self.h = np.asarray(h, dtype=float)
        self.raise_ops = [np.asarray(a, dtype=float) for a in raise_ops]
        self.number_ops = [np.asarray(a, dtype=float) for a in number_ops]
        if len(self.raise_ops) != len(self.levels) or len(self.number_ops) != len(self.levels):
            raise InvariantViolation("one pair-creation and one number operator per level")
        if self.h.shape != (self.dim, self.dim):
            raise InvariantViolation(
                f"block Hamiltonian shape {self.h.shape} does not match dim {self.dim}"
            )

    @property
    def dim(self) -> int:
        return len(self.sectors)

    def raise_op(self, level: int) -> np.ndarray:
        return self.raise_ops[self.levels.index(level)]

    def number_op(self, level: int) -> np.ndarray:
        return self.number_ops[self.levels.index(level)]

    def weighted_raise(self, coeffs) -> np.ndarray:
        """Sum of per-level pair-creation operators with given weights."""
        out = np.zeros((self.dim, self.dim))
        for c, op in zip(coeffs, self.raise_ops):
            if c:
                out += c * op
        return out

    def weighted_number(self, coeffs) -> np.ndarray:
        out = np.zeros((self.dim, self.dim))
        for c, op in zip(coeffs, self.number_ops):
            if c:
                out += c * op
        return out

    def stored_entries(self) -> int:
        """Matrix entries actually held by this block."""
        return self.h.size + sum(a.size for a in self.raise_ops) + sum(
            a.size for a in self.number_ops
        )

    def per_level_entries(self) -> int:
        """Per-level operator entries in the 3-per-level convention."""
        return 3 * len(self.levels) * self.dim * self.dim


def vacuum_block() -> Block:
    """The empty block: one state, zero pairs, no levels."""
    return Block((), [0], [[0.0]], [], [])


def single_level_block(model: PairingModel, level: int) -> Block:
    """Exact two-state block for one level: basis (empty, pair)."""
    e = float(model.eps[level])
    return Block(
        (level,),
        [0, 1],
        np.diag([0.0, 2.0 * e]),
        [_SITE_RAISE],
        [_SITE_NUMBER],
    )


class GrownBlock:
    """A core block enlarged by a small exactly-represented added block.

    The product basis is core-major: index = a * added.dim + s.  Only the
    enlarged Hamiltonian is materialized; enlarged per-level operators are
    built on demand as op (x) identity or identity (x) op and are not
    stored, so growth does not multiply the per-level storage.
    """

    def __init__(self, core: Block, added: Block, model: PairingModel):
        overlap = set(core.levels) & set(added.levels)
        if overlap:
            raise InvariantViolation(f"levels {sorted(overlap)} already in block")
        self.core = core
        self.added = added
        self.levels = core.levels + added.levels
        self.sectors = np.add.outer(core.sectors, added.sectors).ravel()
        ic = np.eye(core.dim)
        ia = np.eye(added.dim)
        h = np.kron(core.h, ia) + np.kron(ic, added.h)
        for li in core.levels:
            for lj in added.levels:
                w1 = float(model.v1[li, lj])
                w2 = float(model.v2[li, lj])
                if w1:
                    bi = core.raise_op(li)
                    bj = added.raise_op(lj)
                    h += w1 * (np.kron(bi, bj.T) + np.kron(bi.T, bj))
                if w2:
                    h += 2.0 * w2 * np.kron(core.number_op(li), added.number_op(lj))
        self.h = h

    @property
    def dim(self) -> int:
        return self.core.dim * self.added.dim

    def raise_op(self, level: int) -> np.ndarray:
        if level in self.core.levels:
            return np.kron(self.core.raise_op(level), np.eye(self.added.dim))
        return np.kron(np.eye(self.core.dim), self.added.raise_op(level))

    def number_op(self, level: int) -> np.ndarray:
        if level in self.core.levels:
            return np.kron(self.core.number_op(level), np.eye(self.added.dim))
        return np.kron(np.eye(self.core.dim), self.added.number_op(level))

    def _weighted(self, coeffs, kind: str) -> np.ndarray:
        nc = len(self.core.levels)
        cc, ca = coeffs[:nc], coeffs[nc:]
        core_sum = getattr(self.core, kind)(cc)
        added_sum = getattr(self.added, kind)(ca)
        out = np.kron(core_sum, np.eye(self.added.dim))
        out += np.kron(np.eye(self.core.dim), added_sum)
        return out

    def weighted_raise(self, coeffs) -> np.ndarray:
        return self._weighted(coeffs, "weighted_raise")

    def weighted_number(self, coeffs) -> np.ndarray:
        return self._weighted(coeffs, "weighted_number")

    def to_block(self) -> Block:
        """Materialize every per-level operator; small blocks and tests."""
        return Block(
            self.levels,
            self.sectors,
            self.h,
            [self.raise_op(l) for l in self.levels],
            [self.number_op(l) for l in self.levels],
        )

    def stored_entries(self) -> int:
        return self.core.stored_entries() + self.added.stored_entries() + self.h.size

    def per_level_entries(self) -> int:
        return self.core.per_level_entries() + self.added.per_level_entries()


def grow_block(block, level: int, model: PairingModel) -> GrownBlock:
    """Enlarge a block by one level; basis order (old basis) x (empty, pair)."""
    if isinstance(block, GrownBlock):
        block = block.to_block()
    return GrownBlock(block, single_level_block(model, level), model)


def exact_block(model: PairingModel, levels) -> Block:
    """Explicit untruncated block over a few levels, built by repeated growth."""
    b = vacuum_block()
    for level in levels:
        b = grow_block(b, level, model).to_block()
    return b


@dataclass(frozen=True)
class DmrgConfig:
    """Run parameters: kept states m, target pair number, solver knobs."""

    m: int
    total_pairs: int
    superblock_tol: float = 1e-10
    max_superblock_iters: Optional[int] = None
    seed: int = 0
    level_order: str = "eps_ascending"

    def __post_init__(self):
        if self.m < 2:
            raise InvariantViolation(f"m must be at least 2, got {self.m}")
        if self.total_pairs < 0:
            raise InfeasibleTarget(
                f"total_pairs must be nonnegative, got {self.total_pairs}"
            )
        if not self.superblock_tol > 0:
            raise InvariantViolation("superblock_tol must be positive")
        if self.max_superblock_iters is not None and self.max_superblock_iters < 1:
            raise InvariantViolation("max_superblock_iters must be positive")
        if self.level_order not in ("eps_ascending", "given"):
            raise InvariantViolation(
                f"level_order must be 'eps_ascending' or 'given', got "
                f"{self.level_order!r}"
            )


def target_pairs(k: int, n_levels: int, total_pairs: int) -> int:
    """Pair number targeted at iteration k: proportional filling.

    round(2k*M/N) with half-up rounding, clipped so that the remaining
    N - 2k levels can absorb the leftover pairs.  Equals k at half filling
    and equals M at the final iteration.
    """
    if not 1 <= k <= n_levels // 2:
        raise InvariantViolation(f"k must be in 1..{n_levels // 2}, got {k}")
    t = (4 * k * total_pairs + n_levels) // (2 * n_levels)
    lo = max(0, 2 * k - (n_levels - total_pairs))
    hi = min(2 * k, total_pairs)
    return min(max(t, lo), hi)


def _schedule(n_levels: int, total_pairs: int):
    """Per-iteration block sizes (hole levels, particle levels).

    Symmetric growth while both sides have levels left; an exhausted side
    hands both of the iteration's levels to the other block.  Sizes always
    sum to 2k, so the run finishes in exactly N/2 iterations.
    """
    holes, parts = total_pairs, n_levels - total_pairs
    out = []
    for k in range(1, n_levels // 2 + 1):
        h = max(min(k, holes), 2 * k - parts)
        out.append((h, 2 * k - h))
    return out


def _ordered_levels(model: PairingModel, config: DmrgConfig):
    """Growth sequences: hole side walks down from the Fermi index,
    particle side walks up."""
    if config.level_order == "eps_ascending":
        order = np.argsort(model.eps, kind="stable")
    else:
        order = np.arange(model.n_levels)
    f = config.total_pairs
    hole_seq = [int(x) for x in order[:f][::-1]]
    part_seq = [int(x) for x in order[f:]]
    return hole_seq, part_seq


def init_blocks(model: PairingModel, config: DmrgConfig):
    """Blocks for the first iteration.

    With pairs on both sides of the Fermi index this is one level per
    block: the highest-eps hole level and the lowest-eps particle level,
    each dim 2.  At the filling extremes one side starts as the vacuum and
    the other with two levels.
    """
    n = model.n_levels
    if n % 2:
        raise OddN(f"the symmetric infinite algorithm needs even N, got {n}")
    if config.total_pairs > n:
        raise InfeasibleTarget(
            f"cannot place {config.total_pairs} pairs on {n} levels"
        )
    hole_seq, part_seq = _ordered_levels(model, config)
    h1, p1 = _schedule(n, config.total_pairs)[0]
    hole = exact_block(model, hole_seq[:h1]) if h1 else vacuum_block()
    particle = exact_block(model, part_seq[:p1]) if p1 else vacuum_block()
    return hole, particle


class _Superblock:
    """Matrix-free superblock Hamiltonian restricted to one pair sector.

    Cross-block couplings are factored by SVD of the coupling submatrices,
    giving one composite operator pair per retained singular value instead
    of one per level pair (rank 1 for constant pairing).
    """

    def __init__(self, hole, particle, model: PairingModel, target: int):
        self.dh, self.dp = hole.dim, particle.dim
        mask = np.add.outer(hole.sectors, particle.sectors) == target
        self.flat_idx = np.flatnonzero(mask.ravel())
        if len(self.flat_idx) == 0:
            raise EmptySector(
                f"no states with {target} pairs in a "
                f"{self.dh}x{self.dp} superblock"
            )
        self.hh, self.hp = hole.h, particle.h
        self.raise_terms = []
        self.number_terms = []
        if hole.levels and particle.levels:
            ix = np.ix_(list(hole.levels), list(particle.levels))
            self.raise_terms = self._factor(model.v1[ix], hole, particle, "weighted_raise")
            self.number_terms = self._factor(
                2.0 * model.v2[ix], hole, particle, "weighted_number"
            )

    @staticmethod
    def _factor(coupling, hole, particle, kind):
        if not np.any(coupling):
            return []
        u, s, vt = np.linalg.svd(coupling)
        terms = []
        for r in range(len(s)):
            if s[r] <= _SVD_CUT * s[0]:
                break
            w = np.sqrt(s[r])
            terms.append(
                (
                    getattr(hole, kind)(w * u[:, r]),
                    getattr(particle, kind)(w * vt[r, :]),
                )
            )
        return terms

    @property
    def sector_dim(self) -> int:
        return len(self.flat_idx)

    def work_entries(self) -> int:
        comp = sum(a.size + b.size for a, b in self.raise_terms)
        comp += sum(a.size + b.size for a, b in self.number_terms)
        return comp + 3 * self.dh * self.dp + 22 * self.sector_dim

    def matvec(self, x: np.ndarray) -> np.ndarray:
        psi = np.zeros(self.dh * self.dp)
        psi[self.flat_idx] = x
        psi = psi.reshape(self.dh, self.dp)
        y = self.hh @ psi
        y += psi @ self.hp
        for a, c in self.raise_terms:
            y += a @ psi @ c
            y += a.T @ psi @ c.T
        for d, e in self.number_terms:
            y += d @ psi @ e
        return y.ravel()[self.flat_idx]

    def embed(self, x: np.ndarray) -> np.ndarray:
        psi = np.zeros(self.dh * self.dp)
        psi[self.flat_idx] = x
        return psi.reshape(self.dh, self.dp)

    def restrict(self, psi: np.ndarray) -> np.ndarray:
        return psi.ravel()[self.flat_idx]


def _solve_superblock(hole, particle, model, target, config, guess=None):
    op = _Superblock(hole, particle, model, target)
    n = op.sector_dim
    if n <= _DENSE_SECTOR:
        k = np.empty((n, n))
        e = np.zeros(n)
        for i in range(n):
            e[i] = 1.0
            k[:, i] = op.matvec(e)
            e[i] = 0.0
        vals, vecs = scipy.linalg.eigh(k)
        return float(vals[0]), op.embed(vecs[:, 0]), op.work_entries()
    v0 = None
    if guess is not None and guess.shape == (op.dh, op.dp):
        g = op.restrict(guess)
        norm = np.linalg.norm(g)
        if norm > 1e-8:
            v0 = g / norm
    if v0 is None:
        rng = np.random.default_rng(config.seed)
        v0 = rng.standard_normal(n)
        v0 /= np.linalg.norm(v0)
    lin = scipy.sparse.linalg.LinearOperator((n, n), matvec=op.matvec, dtype=float)
    try:
        vals, vecs = scipy.sparse.linalg.eigsh(
            lin,
            k=1,
            which="SA",
            tol=config.superblock_tol,
            v0=v0,
            maxiter=config.max_superblock_iters,
        )
    except scipy.sparse.linalg.ArpackNoConvergence as exc:
        res = None
        if len(exc.eigenvalues):
            v = exc.eigenvectors[:, 0]
            res = float(np.linalg.norm(op.matvec(v) - exc.eigenvalues[0] * v))
        raise NoConvergence(
            "superblock eigensolver did not converge",
            energies=np.sort(exc.eigenvalues) if len(exc.eigenvalues) else None,
            residual=res,
        ) from None
    return float(vals[0]), op.embed(vecs[:, 0]), op.work_entries()


def superblock_ground(hole, particle, model: PairingModel, target: int, config: DmrgConfig, guess=None):
    """Ground state of hole (x) particle restricted to ``target`` pairs.

    Returns (E0, psi) with psi a dense (hole.dim, particle.dim) array whose
    support lies entirely in the target sector.  E0 is a variational upper
    bound for the levels the two blocks represent.
    """
    e0, psi, _ = _solve_superblock(hole, particle, model, target, config, guess)
    return e0, psi


def reduced_density(psi: np.ndarray, side: str) -> np.ndarray:
    """Partial trace of |psi><psi| over the opposite block.

    psi must be the (hole dim, particle dim) superblock array with unit
    norm.  The result inherits block-diagonality over pair sectors from
    sector purity of psi.
    """
    psi = np.asarray(psi, dtype=float)
    if psi.ndim != 2:
        raise DimensionMismatch("superblock state must be a 2-d array")
    norm = np.linalg.norm(psi)
    if abs(norm - 1.0) > 1e-12:
        raise NotNormalized(f"|psi| = {norm!r} is not 1 within 1e-12")
    if side == "hole":
        return psi @ psi.T
    if side == "particle":
        return psi.T @ psi
    raise InvariantViolation(f"side must be 'hole' or 'particle', got {side!r}")


def _truncate_with_basis(block, rho: np.ndarray, m: int):
    """Keep the m largest density-matrix eigenstates; also return the
    kept-state column matrix W for guess embedding."""
    d = block.dim
    rho = np.asarray(rho, dtype=float)
    if rho.shape != (d, d):
        raise DimensionMismatch(
            f"density matrix shape {rho.shape} does not match block dim {d}"
        )
    sectors = block.sectors
    lams, secs, vecs = [], [], []
    for s in np.unique(sectors):
        idx = np.flatnonzero(sectors == s)
        sub = rho[np.ix_(idx, idx)]
        vals, vs = scipy.linalg.eigh(sub)
        for c in range(len(vals) - 1, -1, -1):
            lams.append(float(vals[c]))
            secs.append(int(s))
            full = np.zeros(d)
            full[idx] = vs[:, c]
            vecs.append(full)
    # largest weight first; ties resolved by lower sector, then by the
    # deterministic enumeration order above
    order = sorted(range(d), key=lambda i: (-lams[i], secs[i], i))
    keep = order[: min(m, d)]
    w = np.column_stack([vecs[i] for i in keep])
    weight = min(max(1.0 - sum(lams[i] for i in keep), 0.0), 1.0)
    new = Block(
        block.levels,
        [secs[i] for i in keep],
        w.T @ block.h @ w,
        [w.T @ block.raise_op(l) @ w for l in block.levels],
        [w.T @ block.number_op(l) @ w for l in block.levels],
    )
    return new, weight, w


def truncate(block, rho: np.ndarray, m: int):
    """Project a block onto the m dominant eigenstates of rho.

    Returns (new block, truncation weight).  Weight is 1 minus the kept
    eigenvalue sum, clipped into [0, 1].  Kept states are sector-pure, so
    sector labels survive truncation.
    """
    new, weight, _ = _truncate_with_basis(block, rho, m)
    return new, weight


@dataclass(frozen=True)
class IterationRecord:
    iteration: int
    levels_in_superblock: int
    target_pairs: int
    e0: float
    trunc_weight_hole: float
    trunc_weight_particle: float
    dim_hole: int
    dim_particle: int


@dataclass(frozen=True)
class DmrgResult:
    """Per-iteration records plus the final energy and memory accounting.

    memory_peak_entries counts matrix entries actually stored in block
    structures at the worst moment; per_level_peak_entries is the same
    peak counted in the 3-operators-per-level convention (excluding block
    Hamiltonians); work_peak_entries covers solver scratch (composite
    coupling operators, superblock vectors, density matrices).
    """

    iterations: tuple
    final_energy: float
    memory_peak_entries: int
    per_level_peak_entries: int
    work_peak_entries: int
    m: int
    n_levels: int
    total_pairs: int
    wall_seconds: float


def run_infinite(model: PairingModel, config: DmrgConfig) -> DmrgResult:
    """Full infinite-algorithm run: N/2 grow/solve/truncate iterations.

    The last iteration's superblock is the whole system in the physical
    sector, so its E0 is the reported final energy.
    """
    start = time.perf_counter()
    n = model.n_levels
    hole, particle = init_blocks(model, config)
    hole_seq, part_seq = _ordered_levels(model, config)
    plan = _schedule(n, config.total_pairs)
    records = []
    peak_stored = peak_conventional = peak_work = 0
    prev_psi = prev_target = None
    w_hole = w_part = None
    h_prev, p_prev = plan[0]
    for k in range(1, n // 2 + 1):
        h_k, p_k = plan[k - 1]
        if k > 1:
            hole = _enlarge(hole, hole_seq[h_prev:h_k], model)
            particle = _enlarge(particle, part_seq[p_prev:p_k], model)
        target = target_pairs(k, n, config.total_pairs)
        peak_stored = max(
            peak_stored, hole.stored_entries() + particle.stored_entries()
        )
        peak_conventional = max(
            peak_conventional, hole.per_level_entries() + particle.per_level_entries()
        )
        guess = None
        if (
            prev_psi is not None
            and h_k - h_prev == 1
            and p_k - p_prev == 1
            and 0 <= target - prev_target <= 2
        ):
            guess = _embed_guess(prev_psi, w_hole, w_part, target - prev_target)
        try:
            e0, psi, solve_work = _solve_superblock(
                hole, particle, model, target, config, guess
            )
        except (NoConvergence, EmptySector) as exc:
            exc.args = (f"iteration {k}: {exc.args[0]}",) + exc.args[1:]
            raise
        rho_h = reduced_density(psi, "hole")
        rho_p = reduced_density(psi, "particle")
        peak_work = max(
            peak_work, solve_work, rho_h.size + rho_p.size + hole.dim**2
        )
        hole, wh, w_hole = _truncate_with_basis(hole, rho_h, config.m)
        particle, wp, w_part = _truncate_with_basis(particle, rho_p, config.m)
        peak_stored = max(
            peak_stored, hole.stored_entries() + particle.stored_entries()
        )
        peak_conventional = max(
            peak_conventional, hole.per_level_entries() + particle.per_level_entries()
        )
        records.append(
            IterationRecord(
                iteration=k,
                levels_in_superblock=h_k + p_k,
                target_pairs=target,
                e0=e0,
                trunc_weight_hole=wh,
                trunc_weight_particle=wp,
                dim_hole=hole.dim,
                dim_particle=particle.dim,
            )
        )
        prev_psi, prev_target = psi, target
        h_prev, p_prev = h_k, p_k
    return DmrgResult(
        iterations=tuple(records),
        final_energy=records[-1].e0,
        memory_peak_entries=peak_stored,
        per_level_peak_entries=peak_conventional,
        work_peak_entries=peak_work,
        m=config.m,
        n_levels=n,
        total_pairs=config.total_pairs,
        wall_seconds=time.perf_counter() - start,
    )


def _enlarge(block, new_levels, model):
    if not new_levels:
        return block
    if len(new_levels) == 1:
        return grow_block(block, new_levels[0], model)
    if isinstance(block, GrownBlock):
        block = block.to_block()
    return GrownBlock(block, exact_block(model, new_levels), model)


def _embed_guess(prev_psi, w_hole, w_part, delta):
    """Carry the previous ground state into the next superblock.

    The truncated state is re-expanded over the two fresh levels with the
    pair distribution that supplies the target increment: both new levels
    empty (delta 0), one pair shared equally (1), or both occupied (2).
    """
    core = w_hole.T @ prev_psi @ w_part
    chi = np.zeros((2, 2))
    if delta == 0:
        chi[0, 0] = 1.0
    elif delta == 1:
        chi[0, 1] = chi[1, 0] = 1.0 / np.sqrt(2.0)
    else:
        chi[1, 1] = 1.0
    guess = np.einsum("ab,su->asbu", core, chi)
    return guess.reshape(core.shape[0] * 2, core.shape[1] * 2)


def history_csv(result: DmrgResult) -> str:
    """Per-iteration convergence table, 17-significant-digit floats."""
    lines = [
        "iteration,levels_in_superblock,target_pairs,E0,"
        "trunc_weight_hole,trunc_weight_particle,dim_hole,dim_particle"
    ]
    for r in result.iterations:
        lines.append(
            f"{r.iteration},{r.levels_in_superblock},{r.target_pairs},"
            f"{r.e0:.17g},{r.trunc_weight_hole:.17g},"
            f"{r.trunc_weight_particle:.17g},{r.dim_hole},{r.dim_particle}"
        )
    return "\n".join(lines) + "\n"


def summary_dict(result: DmrgResult) -> dict:
    return {
        "final_energy": float(result.final_energy),
        "m": result.m,
        "n_levels": result.n_levels,
        "total_pairs": result.total_pairs,
        "iterations": len(result.iterations),
        "memory_peak_entries": result.memory_peak_entries,
        "wall_seconds": result.wall_seconds,
    }


def memory_report(result: DmrgResult) -> dict:
    """Memory accounting against the 3*m^2*N block-operator budget.

    Raises InvariantViolation if per-level operator storage exceeded the
    budget or total stored entries exceeded budget plus the documented
    block-Hamiltonian allowance.
    """
    bound = 3 * result.m**2 * result.n_levels
    overhead = MEMORY_OVERHEAD_FACTOR * result.m**2
    report = {
        "n_levels": result.n_levels,
        "m": result.m,
        "block_operator_bound_entries": bound,
        "per_level_peak_entries": result.per_level_peak_entries,
        "stored_peak_entries": result.memory_peak_entries,
        "work_peak_entries": result.work_peak_entries,
        "overhead_allowance_entries": overhead,
        "within_bound": (
            result.per_level_peak_entries <= bound
            and result.memory_peak_entries <= bound + overhead
        ),
    }
    if not report["within_bound"]:
        raise InvariantViolation(
            f"stored block operators exceed the budget: "
            f"{result.per_level_peak_entries} per-level entries vs bound {bound}, "
            f"{result.memory_peak_entries} stored vs {bound + overhead}"
        )
    return report
