"""Two-phase primal simplex for small dense linear programs.

Problems are "maximize c.x subject to rows of <=, =, >= constraints, x >= 0".
Phase 1 drives artificial variables (one per = and >= row) to zero; phase 2
optimizes the real objective. Pivoting uses Bland's rule -- lowest-index
entering column, ratio ties broken by lowest basic-variable index -- which
cannot cycle, at the cost of a few extra pivots. That matters here: the
equal-gateway-rate constraints routinely produce degenerate vertices (the
all-zero flow is often optimal).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

RELATIONS = ("<=", "=", ">=")

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"

_PIVOT_TOL = 1e-9
_RATIO_TIE_TOL = 1e-9
_FEAS_TOL = 1e-8


@dataclass(frozen=True)
class LpProblem:
    """maximize objective @ x  s.t.  coeffs @ x (relations) rhs,  x >= 0."""

    objective: np.ndarray
    coeffs: np.ndarray
    relations: tuple[str, ...]
    rhs: np.ndarray

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.objective, dtype=float))
        a = np.asarray(self.coeffs, dtype=float)
        if a.ndim == 1 and a.size == 0:
            a = a.reshape(0, c.size)
        if a.ndim != 2:
            raise ValueError("coeffs must be a 2-D array")
        b = np.atleast_1d(np.asarray(self.rhs, dtype=float))
        rel = tuple(self.relations)
        if a.shape != (b.size, c.size):
            raise ValueError(
                f"dimension mismatch: coeffs {a.shape}, objective {c.size}, rhs {b.size}"
            )
        if len(rel) != b.size:
            raise ValueError("one relation per constraint row required")
        for r in rel:
            if r not in RELATIONS:
                raise ValueError(f"unknown relation {r!r}")
        if not (np.all(np.isfinite(c)) and np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
            raise ValueError("coefficients must be finite")
        for name, val in (("objective", c), ("coeffs", a), ("rhs", b)):
            val.setflags(write=False)
            object.__setattr__(self, name, val)
        object.__setattr__(self, "relations", rel)

    @property
    def num_vars(self) -> int:
        return self.objective.size

    @property
    def num_constraints(self) -> int:
        return self.rhs.size

    def to_text(self) -> str:
        lines = ["max " + " ".join(repr(float(v)) for v in self.objective)]
        for row, rel, b in zip(self.coeffs, self.relations, self.rhs):
            lines.append(
                " ".join(repr(float(v)) for v in row) + f" {rel} " + repr(float(b))
            )
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "LpProblem":
        lines = [ln.strip() for ln in text.splitlines()]
        lines = [ln for ln in lines if ln and not ln.startswith("#")]
        if not lines or not lines[0].startswith("max"):
            raise ValueError("first line must be 'max <coefficients>'")
        c = [float(tok) for tok in lines[0].split()[1:]]
        coeffs, rels, rhs = [], [], []
        for ln in lines[1:]:
            toks = ln.split()
            rel_at = [k for k, t in enumerate(toks) if t in RELATIONS]
            if len(rel_at) != 1:
                raise ValueError(f"constraint needs exactly one relation: {ln!r}")
            k = rel_at[0]
            row = [float(t) for t in toks[:k]]
            tail = [float(t) for t in toks[k + 1 :]]
            if len(row) != len(c) or len(tail) != 1:
                raise ValueError(f"malformed constraint row: {ln!r}")
            coeffs.append(row)
            rels.append(toks[k])
            rhs.append(tail[0])
        return cls(
            objective=np.array(c),
            coeffs=np.array(coeffs).reshape(len(rhs), len(c)),
            relations=tuple(rels),
            rhs=np.array(rhs),
        )


@dataclass(frozen=True)
class LpSolution:
    status: str
    x: np.ndarray | None
    objective: float | None


def _pivot(tableau: np.ndarray, basis: np.ndarray, row: int, col: int) -> None:
    tableau[row] /= tableau[row, col]
    factors = tableau[:, col].copy()
    factors[row] = 0.0
    tableau -= np.outer(factors, tableau[row])
    tableau[:, col] = 0.0
    tableau[row, col] = 1.0
    basis[row] = col


def _iterate(tableau: np.ndarray, basis: np.ndarray, cost: np.ndarray) -> str:
    """Pivot until optimal or unbounded, Bland's rule throughout."""
    m, width = tableau.shape
    ncols = width - 1
    max_iter = 2000 + 200 * (m + ncols)
    for _ in range(max_iter):
        reduced = cost[:ncols] - cost[basis] @ tableau[:, :ncols]
        improving = np.flatnonzero(reduced > _PIVOT_TOL)
        if improving.size == 0:
            return OPTIMAL
        col = int(improving[0])
        pivot_col = tableau[:, col]
        positive = pivot_col > _PIVOT_TOL
        if not positive.any():
            return UNBOUNDED
        ratios = np.full(m, np.inf)
        ratios[positive] = tableau[positive, -1] / pivot_col[positive]
        best = ratios.min()
        ties = np.flatnonzero(ratios <= best + _RATIO_TIE_TOL)
        row = int(ties[np.argmin(basis[ties])])
        _pivot(tableau, basis, row, col)
    raise RuntimeError("simplex failed to converge (iteration limit)")


def solve(p: LpProblem) -> LpSolution:
    """Two-phase simplex. Optimal solutions satisfy all constraints to 1e-8."""
    n = p.num_vars
    m = p.num_constraints

    if m == 0:
        if np.any(p.objective > _PIVOT_TOL):
            return LpSolution(UNBOUNDED, None, None)
        x = np.zeros(n)
        return LpSolution(OPTIMAL, x, 0.0)

    a = p.coeffs.copy()
    b = p.rhs.copy()
    rels = list(p.relations)
    flip = b < 0
    a[flip] *= -1.0
    b[flip] *= -1.0
    swap = {"<=": ">=", ">=": "<=", "=": "="}
    for i in np.flatnonzero(flip):
        rels[i] = swap[rels[i]]

    n_slack = sum(r == "<=" for r in rels)
    n_surplus = sum(r == ">=" for r in rels)
    n_art = sum(r in ("=", ">=") for r in rels)
    art_start = n + n_slack + n_surplus
    ncols = art_start + n_art

    tableau = np.zeros((m, ncols + 1))
    tableau[:, :n] = a
    tableau[:, -1] = b
    basis = np.empty(m, dtype=np.int64)
    slack_at = n
    surplus_at = n + n_slack
    art_at = art_start
    for i, r in enumerate(rels):
        if r == "<=":
            tableau[i, slack_at] = 1.0
            basis[i] = slack_at
            slack_at += 1
        elif r == ">=":
            tableau[i, surplus_at] = -1.0
            tableau[i, art_at] = 1.0
            basis[i] = art_at
            surplus_at += 1
            art_at += 1
        else:
            tableau[i, art_at] = 1.0
            basis[i] = art_at
            art_at += 1

    if n_art:
        cost1 = np.zeros(ncols + 1)
        cost1[art_start:ncols] = -1.0
        status = _iterate(tableau, basis, cost1)
        if status != OPTIMAL:  # pragma: no cover - phase 1 is always bounded
            raise RuntimeError(f"phase-1 simplex reported {status}")
        infeasibility = -(cost1[basis] @ tableau[:, -1])
        if infeasibility > _FEAS_TOL:
            return LpSolution(INFEASIBLE, None, None)
        # pivot lingering artificials out of the basis; drop redundant rows
        keep = np.ones(m, dtype=bool)
        for i in range(m):
            if basis[i] >= art_start:
                row_real = np.abs(tableau[i, :art_start])
                nonzero = np.flatnonzero(row_real > _PIVOT_TOL)
                if nonzero.size:
                    _pivot(tableau, basis, i, int(nonzero[0]))
                else:
                    keep[i] = False
        tableau = tableau[keep]
        basis = basis[keep]

    tableau = np.hstack([tableau[:, :art_start], tableau[:, -1:]])
    cost2 = np.zeros(art_start + 1)
    cost2[:n] = p.objective
    status = _iterate(tableau, basis, cost2)
    if status != OPTIMAL:
        return LpSolution(UNBOUNDED, None, None)

    x = np.zeros(art_start)
    x[basis] = tableau[:, -1]
    x = x[:n]
    return LpSolution(OPTIMAL, x, float(p.objective @ x))
