"""Empirical per-symbol surprisal of Markov trajectories, deformed family.

For a trajectory block ``x_0 .. x_{n-1}`` with probability ``p`` the
per-symbol deformed surprisal is ``-ln_q(p) / n``.  For q < 1 the
deformed surprisal of ANY event is bounded by ``1 / (1 - q)``, so the
per-symbol value is hard-capped at ``1 / ((1 - q) n)`` no matter how the
trajectory behaves — the probe exists to measure what the statistic
actually does against that ceiling.

Everything is computed in log space: ``p`` itself underflows for blocks
beyond a few thousand symbols, but ``L = log p`` accumulates exactly, and

    ln_q(p) = (exp((1 - q) L) - 1) / (1 - q)

is evaluated from ``L`` directly.  When ``(1 - q) L`` underflows the
exponential, the surprisal lands exactly on the q < 1 ceiling; the
mathematical bound is strict, the floating-point one is not, and the
internal guard below is therefore non-strict on purpose.

The decomposition reported per block splits ``-ln_q p`` into the sum of
per-factor surprisals (head term plus conditional terms) and a residual
cross term ``T3 = -t3_residual(factors)``, which is nonpositive for
q < 1 because deformed logs are superadditive over products of
probabilities.

Sampling discipline: trajectory ``t`` of a probe draws its uniforms from
stream ``t`` of the master seed in one block, and the batch sampler and
``sample_trajectory`` share the same state-advance helper, so a probe
trajectory can be reproduced symbol for symbol in isolation.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, ImpossibleTrajectoryError
from .markov import MarkovChain, block_table, stationary
from .measures import _chain_terms_from_array
from .prob import make_rng
from .qcore import SHANNON_TOL, q_value


def _lnq_from_log(log_p, qv: float):
    """ln_q of a probability given its natural log (scalar or array)."""
    arr = np.asarray(log_p, dtype=float)
    if abs(1.0 - qv) <= SHANNON_TOL:
        return arr if arr.ndim else float(arr)
    eps = 1.0 - qv
    with np.errstate(over="ignore", under="ignore"):
        out = (np.exp(eps * arr) - 1.0) / eps
    return out if out.ndim else float(out)


def _advance(cum_rows: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Next states from cumulative rows (k, m) and uniform draws (k,)."""
    nxt = (cum_rows < u[:, None]).sum(axis=1)
    return np.minimum(nxt, cum_rows.shape[1] - 1).astype(np.int64)


@dataclass(frozen=True)
class Trajectory:
    """An observed state sequence over the alphabet {0, .., m-1}."""

    symbols: np.ndarray
    m: int

    def __init__(self, symbols, m):
        arr = np.asarray(symbols)
        if arr.ndim != 1 or arr.size == 0:
            raise ValueError("a trajectory needs at least one symbol")
        if not np.issubdtype(arr.dtype, np.integer):
            raise ValueError("trajectory symbols must be integers")
        arr = arr.astype(np.int64)
        if int(m) < 1 or arr.min() < 0 or arr.max() >= int(m):
            raise ValueError("trajectory symbols must lie in [0, m)")
        arr.setflags(write=False)
        object.__setattr__(self, "symbols", arr)
        object.__setattr__(self, "m", int(m))

    def __len__(self) -> int:
        return int(self.symbols.size)


def sample_trajectory(chain: MarkovChain, length: int, rng: np.random.Generator) -> Trajectory:
    """Draw ``length`` symbols, pre-drawing all uniforms in one block."""
    if length < 1:
        raise ValueError("length must be >= 1")
    u = rng.random(length)
    icum = np.cumsum(chain.initial.p)
    icum[-1] = 1.0
    rcum = np.cumsum(chain.transition, axis=1)
    rcum[:, -1] = 1.0
    syms = np.empty(length, dtype=np.int64)
    syms[0] = _advance(icum[None, :], u[0:1])[0]
    for i in range(1, length):
        syms[i] = _advance(rcum[syms[i - 1]][None, :], u[i : i + 1])[0]
    return Trajectory(syms, chain.m)


def _coerce_symbols(symbols, m: int) -> np.ndarray:
    if isinstance(symbols, Trajectory):
        if symbols.m != m:
            raise ValueError(f"trajectory alphabet size {symbols.m} != chain size {m}")
        return symbols.symbols
    return Trajectory(symbols, m).symbols


def _log_factor(value: float, description: str) -> float:
    if value <= 0.0:
        raise ImpossibleTrajectoryError(f"the chain assigns probability zero to {description}")
    return float(np.log(value))


def block_log_prob_q(chain: MarkovChain, symbols, q) -> float:
    """``ln_q`` of the probability the chain assigns to the symbol block.

    The first symbol is weighted by the chain's initial distribution.
    Nonpositive for probability blocks; computed from the accumulated
    natural log so arbitrarily long blocks stay finite and exact.
    """
    qv = q_value(q)
    s = _coerce_symbols(symbols, chain.m)
    logp = _log_factor(chain.initial.p[s[0]], f"initial state {s[0]}")
    r = chain.transition
    for a, b in zip(s[:-1], s[1:]):
        logp += _log_factor(r[a, b], f"transition {a} -> {b}")
    return float(_lnq_from_log(logp, qv))


def markov_k_block_log_prob_q(chain: MarkovChain, symbols, k: int, q, *, empirical: bool = False) -> float:
    """``ln_q`` of the order-``k`` approximation of the block probability.

    The approximation keeps the exact law of the first ``k`` symbols and
    conditions every later symbol on its ``k`` predecessors only.  With
    ``empirical=False`` those conditional laws come from the chain itself
    (for k >= 1 this reproduces ``block_log_prob_q`` exactly, because the
    chain is order 1); with ``empirical=True`` they are the plug-in
    frequencies counted inside the observed block, and the chain is used
    only for its alphabet size.  ``k = 0`` uses per-position marginals.
    """
    qv = q_value(q)
    if k < 0:
        raise ValueError("order k must be >= 0")
    s = _coerce_symbols(symbols, chain.m)
    n = s.size
    m = chain.m
    if empirical:
        if n < k + 1:
            raise ValueError("empirical estimation needs a block longer than the order")
        if k == 0:
            freq = np.bincount(s, minlength=m) / n
            logp = 0.0
            for sym in s:
                logp += float(np.log(freq[sym]))
        else:
            nexts: dict = {}
            for i in range(n - k):
                key = tuple(s[i : i + k])
                nexts.setdefault(key, []).append(s[i + k])
            grams = n - k + 1
            head = tuple(s[:k])
            head_count = sum(1 for i in range(grams) if tuple(s[i : i + k]) == head)
            logp = float(np.log(head_count / grams))
            for i in range(k, n):
                seen = nexts[tuple(s[i - k : i])]
                logp += float(np.log(seen.count(s[i]) / len(seen)))
    elif k == 0:
        d = chain.initial.p.copy()
        logp = _log_factor(d[s[0]], f"symbol {s[0]} at position 0")
        for i in range(1, n):
            d = d @ chain.transition
            d /= d.sum()
            logp += _log_factor(d[s[i]], f"symbol {s[i]} at position {i}")
    else:
        # order-1 truth: both the exact head and every k-window
        # conditional reduce to one-step transition factors
        logp = _log_factor(chain.initial.p[s[0]], f"initial state {s[0]}")
        for a, b in zip(s[:-1], s[1:]):
            logp += _log_factor(chain.transition[a, b], f"transition {a} -> {b}")
    return float(_lnq_from_log(logp, qv))


def t3_residual(factors, q) -> float:
    """``ln_q(prod factors) - sum ln_q(factor)`` for positive factors.

    This is the cross term by which the deformed log of a product exceeds
    the sum of deformed logs; it is nonnegative when q < 1 and every
    factor lies in (0, 1].  Exactly zero at the classical index.
    """
    qv = q_value(q)
    f = np.asarray(factors, dtype=float)
    if f.ndim != 1 or f.size == 0:
        raise ValueError("factors must be a non-empty 1-D sequence")
    if not np.isfinite(f).all() or (f <= 0).any():
        raise ValueError("factors must be finite and strictly positive")
    logs = np.log(f)
    total = float(logs.sum())
    if abs(1.0 - qv) <= SHANNON_TOL:
        return total - float(logs.sum())
    eps = 1.0 - qv
    sum_lnq = float(((np.power(f, eps) - 1.0) / eps).sum())
    return float(_lnq_from_log(total, qv)) - sum_lnq


def h_q_k(chain: MarkovChain, k: int, q) -> float:
    """Conditional-entropy rate approximant of order ``k``.

    The entropy of one more symbol given ``k`` predecessors, under the
    stationary law of the chain.  For an order-1 chain this is constant
    for all k >= 1.
    """
    if k < 0:
        raise ValueError("order k must be >= 0")
    qv = q_value(q)
    st = stationary(chain)
    t = block_table(MarkovChain(chain.transition, st), k + 1)
    return _chain_terms_from_array(np.asarray(t), qv)[-1]


def h_q_inf(chain: MarkovChain, q, tol: float = 1e-10, k_max: int = 12) -> float:
    """First plateau of the ``h_q_k`` sequence.

    Returns ``h(k*)`` for the smallest ``k*`` with
    ``|h(k*) - h(k* + 1)| <= tol``, scanning from ``k* = 0``.
    """
    qv = q_value(q)
    h_prev = h_q_k(chain, 0, qv)
    for k in range(1, k_max + 2):
        h_cur = h_q_k(chain, k, qv)
        if abs(h_prev - h_cur) <= tol:
            return h_prev
        h_prev = h_cur
    raise ConvergenceError(
        f"conditional-rate sequence did not plateau within k <= {k_max}",
        last=h_prev,
        residuals=[abs(h_prev - h_cur)],
    )


@dataclass(frozen=True)
class SmbPoint:
    """Cross-trajectory statistics of one block length."""

    n: int
    block_mean: float
    block_sd: float
    pk_mean: float
    t3_over_n_mean: float
    cond_c1_rate: float
    cond_c2_rate: float
    ratio1_mean: float
    ratio2_mean: float

    def to_json_dict(self) -> dict:
        return {
            "n": self.n,
            "block_mean": self.block_mean,
            "block_sd": self.block_sd,
            "pk_mean": self.pk_mean,
            "t3_over_n_mean": self.t3_over_n_mean,
            "cond_c1_rate": self.cond_c1_rate,
            "cond_c2_rate": self.cond_c2_rate,
            "ratio1_mean": self.ratio1_mean,
            "ratio2_mean": self.ratio2_mean,
        }


@dataclass(frozen=True)
class SmbCurve:
    """A full probe: one SmbPoint per grid length plus chain-level rates."""

    q: float
    k: int
    n_max: int
    trajectories: int
    seed: int
    points: tuple
    h_q_k: float
    h_q_inf: float
    surprisal_sup: float  # sup of -ln_q(p) over events; inf for q >= 1
    flags: dict

    CSV_HEADER = (
        "n,block_mean,block_sd,pk_mean,t3_over_n_mean,"
        "cond_c1_rate,cond_c2_rate,ratio1_mean,ratio2_mean,h_q_k,h_q_inf"
    )

    def to_csv(self) -> str:
        lines = [self.CSV_HEADER]
        for pt in self.points:
            values = (
                pt.block_mean,
                pt.block_sd,
                pt.pk_mean,
                pt.t3_over_n_mean,
                pt.cond_c1_rate,
                pt.cond_c2_rate,
                pt.ratio1_mean,
                pt.ratio2_mean,
                self.h_q_k,
                self.h_q_inf,
            )
            lines.append(",".join([str(pt.n)] + [f"{v:.10g}" for v in values]))
        return "\n".join(lines) + "\n"

    def to_json_dict(self) -> dict:
        return {
            "q": self.q,
            "k": self.k,
            "n_max": self.n_max,
            "trajectories": self.trajectories,
            "seed": self.seed,
            "h_q_k": self.h_q_k,
            "h_q_inf": self.h_q_inf,
            "surprisal_sup": self.surprisal_sup,
            "flags": dict(self.flags),
            "points": [pt.to_json_dict() for pt in self.points],
        }


def _grid(n_max: int) -> list:
    ns = []
    p = 1
    while p <= n_max:
        ns.append(p)
        p *= 2
    if ns[-1] != n_max:
        ns.append(n_max)
    return ns


def smb_probe(chain: MarkovChain, q, n_max: int, trajectories: int, seed: int = 0, k: int = 1) -> SmbCurve:
    """Sample trajectories under the stationary start and track the
    per-symbol deformed surprisal across a power-of-two grid of lengths.

    Each trajectory carries one extra leading symbol (the pre-block
    state) so conditional-versus-marginal ratios are observable: blocks
    of length ``n`` are positions 1..n, the first block symbol follows
    the one-step evolution of the stationary start, and ``ratio1``
    compares its transition probability from the pre-block state with
    its marginal.  ``c1`` checks that the one-step conditional dominates
    the whole-block probability, ``c2`` that the block probability
    dominates its order-``k`` approximation; their rates are fractions of
    trajectories.  Standard deviations are population (ddof = 0).

    ``t3_over_n_mean`` is the mean interaction residual of the
    factorization in use — the q-log of the product of its non-head
    factors minus the sum of their q-logs, same convention as
    :func:`t3_residual` — divided by the block length.  It is
    nonnegative for q < 1 and identically zero at q = 1.  Flags:
    ``c1_failed`` / ``c2_failed`` report whether the corresponding
    condition failed on any trajectory at any recorded length;
    ``t3_failed`` reports whether |t3/n| still exceeds 1e-3 at the
    largest length (the vanishing-interaction hypothesis looks false);
    ``bound_saturated`` reports a per-symbol value within float
    resolution of the 1/((1-q)n) ceiling at the largest length;
    ``pk_equals_block`` reports that the order-k approximation agreed
    with the exact block probability at every length;
    ``q_outside_theorem_range`` warns that q is outside (1/2, 1), where
    the convergence statement being probed does not apply.
    """
    qv = q_value(q)
    if qv < 0:
        raise ValueError("the probe requires q >= 0")
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    if trajectories < 1:
        raise ValueError("trajectories must be >= 1")
    if k < 0:
        raise ValueError("order k must be >= 0")

    c = MarkovChain(chain.transition, stationary(chain))
    r = c.transition
    m = c.m
    big_t = trajectories

    u = np.stack([make_rng(seed, stream=t).random(n_max + 1) for t in range(big_t)])
    icum = np.cumsum(c.initial.p)
    icum[-1] = 1.0
    rcum = np.cumsum(r, axis=1)
    rcum[:, -1] = 1.0
    syms = np.empty((big_t, n_max + 1), dtype=np.int64)
    syms[:, 0] = _advance(np.broadcast_to(icum, (big_t, m)), u[:, 0])
    for i in range(1, n_max + 1):
        syms[:, i] = _advance(rcum[syms[:, i - 1]], u[:, i])

    d1 = c.evolve(1).p
    with np.errstate(divide="ignore"):
        logr = np.log(r)
        logd1 = np.log(d1)
    head_l = logd1[syms[:, 1]]
    lcond = logr[syms[:, :-1], syms[:, 1:]]  # column j: log r[x_{j-1} -> x_j]
    lblock = np.concatenate([head_l[:, None], lcond[:, 1:]], axis=1).cumsum(axis=1)
    if not np.isfinite(lblock).all():
        raise ImpossibleTrajectoryError("sampled a transition of probability zero")

    shannon = abs(1.0 - qv) <= SHANNON_TOL

    if k == 0:
        lmarg = np.empty((big_t, n_max))
        d = c.initial.p.copy()
        for j in range(1, n_max + 1):
            d = d @ r
            d /= d.sum()
            with np.errstate(divide="ignore"):
                lmarg[:, j - 1] = np.log(d)[syms[:, j]]
        lpk = lmarg.cumsum(axis=1)
        # interaction residual over the marginal factors (the k = 0
        # factorization has no conditioning head)
        flogcum = lpk
        if shannon:
            fqlcum = lpk
        else:
            eps = 1.0 - qv
            fqlcum = ((np.exp(eps * lmarg) - 1.0) / eps).cumsum(axis=1)
        t3_start = 0
    else:
        lpk = lblock  # order-1 truth: every k >= 1 approximation is exact
        # interaction residual over the conditional factors of the
        # order-k factorization, head block (positions 1..k) excluded
        fcols = lcond[:, k:]
        flogcum = fcols.cumsum(axis=1)
        if shannon:
            fqlcum = flogcum
        else:
            eps = 1.0 - qv
            fqlcum = ((np.exp(eps * fcols) - 1.0) / eps).cumsum(axis=1)
        t3_start = k

    logr1 = logr[syms[:, 0], syms[:, 1]]
    ratio1 = np.exp(logr1 - head_l)

    points = []
    saturated = False
    for n in _grid(n_max):
        lb = lblock[:, n - 1]
        lk = lpk[:, n - 1]
        vb = -np.asarray(_lnq_from_log(lb, qv)) / n
        vk = -np.asarray(_lnq_from_log(lk, qv)) / n
        if qv < 1.0 - SHANNON_TOL:
            cap = 1.0 / ((1.0 - qv) * n)
            if vb.min() < -1e-12 or vb.max() > cap * (1.0 + 1e-12):
                raise RuntimeError("per-symbol surprisal escaped its ceiling")
            if n == n_max and vb.max() >= cap * (1.0 - 1e-12):
                saturated = True
        if n <= t3_start:
            t3 = np.zeros(big_t)
        else:
            j = n - t3_start - 1
            t3 = np.asarray(_lnq_from_log(flogcum[:, j], qv)) - fqlcum[:, j]
        points.append(
            SmbPoint(
                n=n,
                block_mean=float(vb.mean()),
                block_sd=float(vb.std(ddof=0)),
                pk_mean=float(vk.mean()),
                t3_over_n_mean=float(t3.mean() / n),
                cond_c1_rate=float((logr1 >= lb).mean()),
                cond_c2_rate=float((lb >= lk).mean()),
                ratio1_mean=float(ratio1.mean()),
                ratio2_mean=float(np.exp(lb - lk).mean()),
            )
        )

    flags = {
        "c1_failed": bool(any(pt.cond_c1_rate < 1.0 for pt in points)),
        "c2_failed": bool(any(pt.cond_c2_rate < 1.0 for pt in points)),
        "t3_failed": bool(abs(points[-1].t3_over_n_mean) > 1e-3),
        "bound_saturated": bool(saturated),
        "pk_equals_block": bool(all(abs(pt.ratio2_mean - 1.0) <= 1e-12 for pt in points)),
        "q_outside_theorem_range": bool(not (0.5 < qv < 1.0 - SHANNON_TOL)),
    }
    return SmbCurve(
        q=qv,
        k=int(k),
        n_max=int(n_max),
        trajectories=big_t,
        seed=int(seed),
        points=tuple(points),
        h_q_k=h_q_k(chain, k, qv),
        h_q_inf=h_q_inf(chain, qv),
        surprisal_sup=(1.0 / (1.0 - qv) if qv < 1.0 - SHANNON_TOL else math.inf),
        flags=flags,
    )
