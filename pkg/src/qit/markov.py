"""Finite Markov chains: block distributions, entropy rates, second law.

A chain is a row-stochastic transition matrix plus an initial
distribution.  Two families of results live here:

* entropy-rate approximants — the block entropy over the first ``n``
  symbols divided by ``n``, and the average of the conditional
  (chain-rule) terms of the same block.  For deformation indices in
  [0, 1) the conditional average always dominates the block average; the
  gap is the accumulated interaction slack of the chain rule.

* a stepwise second-law report for doubly stochastic transitions.  Let
  ``psi`` be the state distribution, ``psi' = psi @ r`` its successor and
  ``J[i, j] = psi[i] r[i, j]`` the two-step joint.  With
  ``bracket = m**(1 - q)`` the exact decomposition

      delta_H * bracket  =  D_q(J || J~)  +  T_q,
      J~[i, j] = psi'[j] r[i, j],
      T_q = (1 - q) * sum_{J>0} J ln_q(psi'[j] m) ln_q(J / (psi'[j] r))

  holds for every q != 1 (and the q -> 1 limit).  When the transition is
  doubly stochastic, ``J~`` is itself a probability table, so the
  divergence — the slack ``delta_H * bracket - T_q`` — is nonnegative and
  the deformed entropy cannot decrease faster than the correction term
  allows.  The report evaluates every piece per step, flags whether the
  doubly-stochastic premise holds, and also carries an alternative
  correction term ``T_q_statement`` (same weights, second factor
  ``ln_q(J m)``), reported for comparison only: no law is asserted on it.
"""

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import ConvergenceError, SizeBudgetError
from .measures import _chain_terms_from_array, _entropy_from_array
from .prob import NORM_TOL, ProbVec
from .qcore import SHANNON_TOL, q_value

#: Cap on exact block-table enumeration (number of cells).
BLOCK_CELL_BUDGET = 1 << 20


def _validate_transition(r) -> np.ndarray:
    arr = np.array(r, dtype=float)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] == 0:
        raise ValueError("transition matrix must be square and non-empty")
    if not np.isfinite(arr).all():
        raise ValueError("transition matrix must be finite")
    if (arr < 0).any():
        raise ValueError("transition matrix must be nonnegative")
    rows = arr.sum(axis=1)
    if np.abs(rows - 1.0).max() > NORM_TOL:
        raise ValueError("transition rows must each sum to 1")
    arr.setflags(write=False)
    return arr


class MarkovChain:
    """Row-stochastic transition matrix with an initial distribution."""

    __slots__ = ("transition", "initial")

    def __init__(self, transition, initial=None):
        t = _validate_transition(transition)
        object.__setattr__(self, "transition", t)
        if initial is None:
            initial = ProbVec(np.full(t.shape[0], 1.0 / t.shape[0]))
        else:
            initial = ProbVec.coerce(initial)
        if len(initial) != t.shape[0]:
            raise ValueError("initial distribution length must match the state count")
        object.__setattr__(self, "initial", initial)

    def __setattr__(self, name, value):
        raise AttributeError("MarkovChain is immutable")

    @property
    def m(self) -> int:
        return self.transition.shape[0]

    def evolve(self, steps: int = 1, start=None) -> ProbVec:
        """State distribution after ``steps`` transitions."""
        if steps < 0:
            raise ValueError("steps must be >= 0")
        psi = (self.initial if start is None else ProbVec.coerce(start)).p.copy()
        for _ in range(steps):
            psi = psi @ self.transition
            psi /= psi.sum()  # floating-point hygiene over long horizons
        return ProbVec(psi)

    def __repr__(self) -> str:
        return f"MarkovChain(m={self.m})"


def is_doubly_stochastic(r, tol: float = 1e-9) -> bool:
    """True when both the rows and the columns of ``r`` sum to 1."""
    arr = r.transition if isinstance(r, MarkovChain) else np.asarray(r, dtype=float)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        return False
    if not np.isfinite(arr).all() or (arr < 0).any():
        return False
    return (
        float(np.abs(arr.sum(axis=1) - 1.0).max()) <= tol
        and float(np.abs(arr.sum(axis=0) - 1.0).max()) <= tol
    )


def random_doubly_stochastic(m: int, rng: np.random.Generator, *, tol: float = 1e-13, max_rounds: int = 100_000) -> np.ndarray:
    """Random doubly stochastic matrix: symmetrized Dirichlet rows, then
    alternating row/column normalization until both deviations fall
    below ``tol`` (entries are strictly positive, so the scaling always
    converges)."""
    if m < 1:
        raise ValueError("m must be >= 1")
    a = rng.standard_exponential((m, m))
    a /= a.sum(axis=1, keepdims=True)
    s = (a + a.T) / 2.0
    for _ in range(max_rounds):
        s /= s.sum(axis=1, keepdims=True)
        s /= s.sum(axis=0, keepdims=True)
        dev = max(
            float(np.abs(s.sum(axis=1) - 1.0).max()),
            float(np.abs(s.sum(axis=0) - 1.0).max()),
        )
        if dev <= tol:
            break
    else:
        raise ConvergenceError(
            f"doubly stochastic scaling did not reach {tol:g} in {max_rounds} rounds",
            last=s,
            residuals=[dev],
        )
    s /= s.sum(axis=1, keepdims=True)
    return s


def stationary(chain, tol: float = 1e-12, max_iters: int = 1_000_000) -> ProbVec:
    """Stationary distribution by damped power iteration.

    Iterates ``psi <- (psi + psi @ r) / 2`` (the half-lazy chain, which
    shares stationary distributions with ``r`` but is never periodic)
    until ``||psi @ r - psi||_1 <= tol``.  For reducible chains the
    result depends on the starting distribution (the chain's own initial
    distribution, or uniform when a bare matrix is given).
    """
    if isinstance(chain, MarkovChain):
        r = chain.transition
        psi = chain.initial.p.copy()
    else:
        r = _validate_transition(chain)
        psi = np.full(r.shape[0], 1.0 / r.shape[0])
    residual = math.inf
    for _ in range(max_iters):
        nxt = psi @ r
        residual = float(np.abs(nxt - psi).sum())
        if residual <= tol:
            psi /= psi.sum()
            return ProbVec(psi)
        psi = (psi + nxt) / 2.0
        psi /= psi.sum()
    raise ConvergenceError(
        f"power iteration residual {residual:.3e} above {tol:g} after {max_iters} iterations",
        last=psi,
        residuals=[residual],
    )


def block_table(chain: MarkovChain, n: int, *, cell_budget: int = BLOCK_CELL_BUDGET) -> np.ndarray:
    """Exact joint distribution of the first ``n`` symbols.

    Returned as a bare rank-``n`` array (block length routinely exceeds
    the rank cap of the JointTable container).  Raises SizeBudgetError
    when ``m ** n`` exceeds ``cell_budget``; the exception carries the
    largest block length that would have fit.
    """
    if n < 1:
        raise ValueError("block length must be >= 1")
    m = chain.m
    if m**n > cell_budget:
        fit = 0
        cells = 1
        while cells * m <= cell_budget:
            cells *= m
            fit += 1
        raise SizeBudgetError(
            f"block of length {n} over {m} states needs {m**n} cells "
            f"(budget {cell_budget})",
            last_bracket=fit,
        )
    t = chain.initial.p.copy()
    for _ in range(n - 1):
        t = t[..., :, None] * chain.transition
    return t


class RateApproximants(NamedTuple):
    block_rate: float
    cond_rate: float


def entropy_rate_approximants(chain: MarkovChain, n: int, q) -> RateApproximants:
    """Block-entropy rate and conditional-term rate over the first ``n`` symbols.

    ``block_rate`` is the joint entropy of the length-``n`` block divided
    by ``n``; ``cond_rate`` is the mean of the block's chain-rule terms
    (the first term is the entropy of the first symbol, unconditioned).
    For 0 <= q < 1, ``cond_rate >= block_rate``.
    """
    qv = q_value(q)
    t = block_table(chain, n)
    block = _entropy_from_array(t, qv)
    terms = _chain_terms_from_array(t, qv)
    return RateApproximants(block_rate=block / n, cond_rate=float(sum(terms)) / n)


@dataclass(frozen=True)
class SecondLawRow:
    """One transition of the stepwise second-law decomposition.

    ``h_q`` is the entropy of the arrival distribution, ``delta_h`` its
    increase over the departure distribution, ``lhs = delta_h * m**(1-q)``
    and ``slack = lhs - t_q`` equals the divergence between the realized
    joint and its time-reversed reference — nonnegative whenever
    ``applicable`` (the transition is doubly stochastic) is true.
    """

    step: int
    h_q: float
    delta_h: float
    t_q: float
    lhs: float
    slack: float
    t_q_statement: float
    applicable: bool

    CSV_HEADER = "step,H_q,delta_H,T_q,lhs,slack"

    def to_csv_row(self) -> str:
        return ",".join(
            [str(self.step)]
            + [f"{v:.10g}" for v in (self.h_q, self.delta_h, self.t_q, self.lhs, self.slack)]
        )

    def to_json_dict(self) -> dict:
        return {
            "step": self.step,
            "h_q": self.h_q,
            "delta_h": self.delta_h,
            "t_q": self.t_q,
            "lhs": self.lhs,
            "slack": self.slack,
            "t_q_statement": self.t_q_statement,
            "applicable": self.applicable,
        }


def _lnq_arr(a: np.ndarray, qv: float) -> np.ndarray:
    if abs(1.0 - qv) <= SHANNON_TOL:
        return np.log(a)
    eps = 1.0 - qv
    return (np.power(a, eps) - 1.0) / eps


def second_law_report(chain: MarkovChain, steps: int, q) -> list[SecondLawRow]:
    """Per-step second-law decomposition along the chain's trajectory.

    Asserted (slack >= 0) only for doubly stochastic transitions and
    0 <= q < 1; the report is computed for any chain in that q range and
    the ``applicable`` flag marks whether the premise holds.
    """
    qv = q_value(q)
    if not 0.0 <= qv < 1.0:
        raise ValueError(f"second-law report requires 0 <= q < 1, got {qv:g}")
    if steps < 1:
        raise ValueError("steps must be >= 1")
    r = chain.transition
    m = chain.m
    applicable = is_doubly_stochastic(r)
    bracket = float(m) ** (1.0 - qv)
    rows = []
    psi = chain.initial.p.copy()
    h_prev = _entropy_from_array(psi, qv)
    for step in range(1, steps + 1):
        joint = psi[:, None] * r
        nxt = joint.sum(axis=0)
        nxt /= nxt.sum()
        h_next = _entropy_from_array(nxt, qv)
        delta = h_next - h_prev
        mask = joint > 0
        nxt_b = np.broadcast_to(nxt[None, :], joint.shape)[mask]
        lq_scaled = _lnq_arr(nxt_b * m, qv)
        lq_ratio = _lnq_arr(joint[mask] / (nxt_b * r[mask]), qv)
        t_q = (1.0 - qv) * float((joint[mask] * lq_scaled * lq_ratio).sum())
        t_q_stmt = (
            (1.0 - qv)
            / bracket
            * float((joint[mask] * lq_scaled * _lnq_arr(joint[mask] * m, qv)).sum())
        )
        lhs = delta * bracket
        rows.append(
            SecondLawRow(
                step=step,
                h_q=h_next,
                delta_h=delta,
                t_q=t_q,
                lhs=lhs,
                slack=lhs - t_q,
                t_q_statement=t_q_stmt,
                applicable=applicable,
            )
        )
        psi = nxt
        h_prev = h_next
    return rows
