"""Inequality and identity verification for the deformed measures.

Every law is rewritten as a slack that must be nonnegative, so a single
predicate (``slack >= -tol``) decides a pass.  Identities are folded into
the same predicate by defining their slack as ``-|residual|`` and using the
tighter identity tolerance.  The sign conventions below follow from the
deformed product rule: for indices 0 <= q < 1 the logarithm of a product
of probabilities exceeds the sum of the logarithms (the cross terms are
nonnegative), hence joint entropies sit *below* the sum of their
conditional parts and each slack is the corresponding nonnegative
interaction term.

Law identifiers and their instance shapes:

=================  ==============================================  =========
law                instance                                        q range
=================  ==============================================  =========
joint-chain        rank-2 joint table                              [0, 1)
indep-superadd     pair of marginal distributions                  [0, 1)
cond-chain         rank-3 joint table (conditioning axis last)     [0, 1)
block-chain        rank-2..4 joint table                           [0, 1)
qln-sum            pair of nonnegative weight vectors              [0, 2]
dq-nonneg          pair of distributions of equal length           [0, 2]
max-bound          single distribution                             [0, 2]
dpi                rank-3 table whose middle axis separates        [0, 1)
info-chain-rule    rank-3 table, target variable on the last axis  [0, 1)
rel-chain-rule     pair of equal-shape rank-2 tables               [0, 1)
=================  ==============================================  =========

``fuzz`` runs a seeded campaign of random instances for one law.  Worker
partitioning is deterministic: worker ``w`` owns a contiguous chunk of the
trials and draws from stream ``w`` of the master seed, so a report depends
only on (law, trials, q-range, seed, tol, workers), never on scheduling.
"""

import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable

import numpy as np

from . import measures
from .prob import JointTable, ProbVec, make_rng, product_dist, random_dist, random_joint, random_markov_triple
from .qcore import SHANNON_TOL, ln_q, q_value

#: Violation threshold for inequality laws.
TOL_INEQUALITY = 1e-9
#: Violation threshold for exact identities.
TOL_IDENTITY = 1e-10


class LawId(str, Enum):
    JOINT_CHAIN = "joint-chain"
    INDEP_SUPERADD = "indep-superadd"
    COND_CHAIN = "cond-chain"
    BLOCK_CHAIN = "block-chain"
    QLN_SUM = "qln-sum"
    DQ_NONNEG = "dq-nonneg"
    MAX_BOUND = "max-bound"
    DPI = "dpi"
    INFO_CHAIN_RULE = "info-chain-rule"
    REL_CHAIN_RULE = "rel-chain-rule"

    def __str__(self) -> str:  # keep CLI text clean
        return self.value


def _lnq_pos(a, qv):
    if abs(1.0 - qv) <= SHANNON_TOL:
        return np.log(a)
    eps = 1.0 - qv
    return (np.power(a, eps) - 1.0) / eps


# ---------------------------------------------------------------------------
# slack functions (inequalities)

def _slack_block_chain(j, qv: float) -> float:
    table = JointTable.coerce(j)
    terms = measures.q_entropy_chain_terms(table, qv)
    return float(sum(terms) - measures.q_entropy_joint(table, qv))


def _slack_joint_chain(j, qv: float) -> float:
    table = JointTable.coerce(j)
    if table.rank != 2:
        raise ValueError("joint-chain expects a rank-2 table")
    # the two-variable case of the block chain rule, shared on purpose so
    # the n = 2 block slack coincides with this one bit for bit
    return _slack_block_chain(table, qv)


def _slack_indep_superadd(instance, qv: float) -> float:
    p, r = instance
    pv = ProbVec.coerce(p)
    rv = ProbVec.coerce(r)
    joint = product_dist(pv, rv)
    return float(
        measures.q_entropy(pv, qv)
        + measures.q_entropy(rv, qv)
        - measures.q_entropy_joint(joint, qv)
    )


def _slack_cond_chain(j, qv: float) -> float:
    table = JointTable.coerce(j)
    if table.rank != 3:
        raise ValueError("cond-chain expects a rank-3 table (axes X, Y, Z)")
    pxz = JointTable(table.marginal_array((0, 2)))
    h_x_given_z = measures.q_entropy_conditional(pxz, 1, qv)
    h_y_given_xz = measures.q_entropy_conditional(table, (0, 2), qv)
    h_xy_given_z = measures.q_entropy_conditional(table, 2, qv)
    return float(h_x_given_z + h_y_given_xz - h_xy_given_z)


def _slack_qln_sum(instance, qv: float) -> float:
    r, s = (np.asarray(v, dtype=float) for v in instance)
    if r.shape != s.shape or r.ndim != 1 or r.size == 0:
        raise ValueError("qln-sum expects two equal-length 1-D weight vectors")
    if (r < 0).any() or (s < 0).any() or not (np.isfinite(r).all() and np.isfinite(s).all()):
        raise ValueError("qln-sum weights must be finite and nonnegative")
    rs = float(r.sum())
    ss = float(s.sum())
    if rs == 0:
        return 0.0
    if ss == 0:
        return math.inf
    mask = r > 0
    if (s[mask] == 0).any():
        return math.inf
    lhs = float((r[mask] * _lnq_pos(r[mask] / s[mask], qv)).sum())
    rhs = rs * float(ln_q(rs / ss, qv))
    return lhs - rhs


def _slack_dq_nonneg(instance, qv: float) -> float:
    p, r = instance
    return measures.relative_q_entropy(p, r, qv)


def _slack_max_bound(p, qv: float) -> float:
    pv = ProbVec.coerce(p)
    return measures.q_entropy_max(len(pv), qv) - measures.q_entropy(pv, qv)


def _dpi_correction(t: np.ndarray, qv: float) -> float:
    """Cross term sum p ln_q[p(x,z)/(p(x)p(z))] ln_q[p(x,y|z)/(p(x|z)p(y|z))]."""
    px = t.sum(axis=(1, 2))
    pz = t.sum(axis=(0, 1))
    pxz = t.sum(axis=1)
    pyz = t.sum(axis=0)
    mask = t > 0
    a_ratio = pxz[:, None, :] / (px[:, None, None] * pz[None, None, :])
    b_num = t * pz[None, None, :]
    b_den = pxz[:, None, :] * pyz[None, :, :]
    a = np.broadcast_to(a_ratio, t.shape)[mask]
    b = b_num[mask] / b_den[mask]
    return float((t[mask] * _lnq_pos(a, qv) * _lnq_pos(b, qv)).sum())


def _slack_dpi(j, qv: float) -> float:
    """Deformed data-processing inequality on a rank-3 table (X, Y, Z).

    Requires the middle axis to separate the outer two (as produced by
    ``random_markov_triple``); the slack then equals the conditional
    mutual information of X and Y given Z, which is nonnegative.
    """
    table = JointTable.coerce(j)
    if table.rank != 3:
        raise ValueError("dpi expects a rank-3 table (axes X, Y, Z)")
    t = table.t
    i_xy = measures.mutual_q_information(JointTable(t.sum(axis=2)), qv)
    i_xz = measures.mutual_q_information(JointTable(t.sum(axis=1)), qv)
    correction = (1.0 - qv) * _dpi_correction(t, qv)
    return float(i_xy - i_xz - correction)


# ---------------------------------------------------------------------------
# identity residuals

def _residual_info_chain(j, qv: float) -> float:
    """Mutual-information chain identity for two sources and one target.

    I(X1,X2; Y) = I(X1; Y) + I(X2; Y | X1)
                  + (1-q) * sum p ln_q(R1) ln_q(R2)

    with R1 = p(x1,y)/(p(x1)p(y)) and R2 = p(x2,y|x1)/(p(x2|x1)p(y|x1)).
    """
    table = JointTable.coerce(j)
    if table.rank != 3:
        raise ValueError("info-chain-rule expects a rank-3 table (axes X1, X2, Y)")
    t = table.t
    m1, m2, my = t.shape
    i_joint = measures.mutual_q_information(JointTable(t.reshape(m1 * m2, my)), qv)
    i_1 = measures.mutual_q_information(JointTable(t.sum(axis=1)), qv)
    i_2_given_1 = measures.conditional_mutual_q_information(table, qv, given_axis=0)

    p1 = t.sum(axis=(1, 2))
    py = t.sum(axis=(0, 1))
    p1y = t.sum(axis=1)
    p12 = t.sum(axis=2)
    mask = t > 0
    r1 = p1y[:, None, :] / (p1[:, None, None] * py[None, None, :])
    r2_num = t * p1[:, None, None]
    r2_den = p12[:, :, None] * p1y[:, None, :]
    a = np.broadcast_to(r1, t.shape)[mask]
    b = r2_num[mask] / r2_den[mask]
    cross = float((t[mask] * _lnq_pos(a, qv) * _lnq_pos(b, qv)).sum())
    return i_joint - i_1 - i_2_given_1 - (1.0 - qv) * cross


def _residual_rel_chain(instance, qv: float) -> float:
    """Chain identity for the divergence of two rank-2 tables.

    D(p(x,y) || r(x,y)) = D(p(x) || r(x)) + D(p(y|x) || r(y|x))
                          + (1-q) * sum p ln_q(pX/rX) ln_q(p(y|x)/r(y|x))

    Undefined (infinite) components propagate: the residual is +inf when
    absolute continuity fails.
    """
    pj, rj = instance
    pt = JointTable.coerce(pj)
    rt = JointTable.coerce(rj)
    if pt.rank != 2 or pt.shape != rt.shape:
        raise ValueError("rel-chain-rule expects two equal-shape rank-2 tables")
    lhs = measures.relative_q_entropy(ProbVec(pt.t.reshape(-1)), ProbVec(rt.t.reshape(-1)), qv)
    d_marg = measures.relative_q_entropy(pt.marginal(0), rt.marginal(0), qv)
    d_cond = measures.relative_q_entropy_conditional(pt, rt, 0, qv)
    if math.isinf(lhs) or math.isinf(d_marg) or math.isinf(d_cond):
        return math.inf
    px = pt.t.sum(axis=1)
    rx = rt.t.sum(axis=1)
    pc = pt.conditional(0)
    rc = rt.conditional(0)
    mask = pt.t > 0
    lx = _lnq_pos(np.broadcast_to((px / rx)[:, None], pt.shape)[mask], qv)
    lc = _lnq_pos(pc[mask] / rc[mask], qv)
    cross = float((pt.t[mask] * lx * lc).sum())
    return lhs - d_marg - d_cond - (1.0 - qv) * cross


def identity_residual(identity: str, instance, q) -> float:
    """|LHS - RHS| of an exact identity.

    ``identity`` is one of ``pseudo-add`` (instance: pair of positive
    reals), ``info-chain-rule-n2`` (rank-3 table), or ``rel-chain-rule``
    (pair of rank-2 tables).
    """
    qv = q_value(q)
    if identity == "pseudo-add":
        from .qcore import pseudo_additivity_residual

        x, y = instance
        return abs(float(pseudo_additivity_residual(x, y, qv)))
    if identity == "info-chain-rule-n2":
        return abs(_residual_info_chain(instance, qv))
    if identity == "rel-chain-rule":
        return abs(_residual_rel_chain(instance, qv))
    raise ValueError(f"unknown identity {identity!r}")


# ---------------------------------------------------------------------------
# law registry

@dataclass(frozen=True)
class _QRange:
    lo: float
    hi: float
    hi_closed: bool

    def contains(self, qv: float) -> bool:
        if qv < self.lo:
            return False
        return qv <= self.hi if self.hi_closed else qv < self.hi

    def describe(self) -> str:
        return f"[{self.lo:g}, {self.hi:g}{']' if self.hi_closed else ')'}"


_SUB1 = _QRange(0.0, 1.0, hi_closed=False)
_LE2 = _QRange(0.0, 2.0, hi_closed=True)


def _axis(rng, lo=2, hi=6):
    return int(rng.integers(lo, hi + 1))


def _sample_rank2(rng):
    return random_joint((_axis(rng), _axis(rng)), rng)


def _sample_pair_dists(rng):
    return (random_dist(_axis(rng), rng), random_dist(_axis(rng), rng))


def _sample_rank3(rng):
    return random_joint((_axis(rng, 2, 4), _axis(rng, 2, 4), _axis(rng, 2, 4)), rng)


def _sample_block(rng):
    rank = int(rng.integers(2, 5))
    hi = 6 if rank == 2 else 3
    return random_joint(tuple(_axis(rng, 2, hi) for _ in range(rank)), rng)


def _sample_weights(rng):
    m = _axis(rng, 2, 8)
    return (rng.standard_exponential(m), rng.standard_exponential(m))


def _sample_same_length_dists(rng):
    m = _axis(rng)
    return (random_dist(m, rng), random_dist(m, rng))


def _sample_dist(rng):
    return random_dist(_axis(rng, 2, 8), rng)


def _sample_markov(rng):
    return random_markov_triple((_axis(rng, 2, 4), _axis(rng, 2, 4), _axis(rng, 2, 4)), rng)


def _sample_rel_pair(rng):
    shape = (_axis(rng, 2, 4), _axis(rng, 2, 4))
    return (random_joint(shape, rng), random_joint(shape, rng))


@dataclass(frozen=True)
class LawSpec:
    law: LawId
    q_range: _QRange
    identity: bool
    sample: Callable
    evaluate: Callable  # slack for inequalities, signed residual for identities


_REGISTRY: dict[LawId, LawSpec] = {
    spec.law: spec
    for spec in [
        LawSpec(LawId.JOINT_CHAIN, _SUB1, False, _sample_rank2, _slack_joint_chain),
        LawSpec(LawId.INDEP_SUPERADD, _SUB1, False, _sample_pair_dists, _slack_indep_superadd),
        LawSpec(LawId.COND_CHAIN, _SUB1, False, _sample_rank3, _slack_cond_chain),
        LawSpec(LawId.BLOCK_CHAIN, _SUB1, False, _sample_block, _slack_block_chain),
        LawSpec(LawId.QLN_SUM, _LE2, False, _sample_weights, _slack_qln_sum),
        LawSpec(LawId.DQ_NONNEG, _LE2, False, _sample_same_length_dists, _slack_dq_nonneg),
        LawSpec(LawId.MAX_BOUND, _LE2, False, _sample_dist, _slack_max_bound),
        LawSpec(LawId.DPI, _SUB1, False, _sample_markov, _slack_dpi),
        LawSpec(LawId.INFO_CHAIN_RULE, _SUB1, True, _sample_rank3, _residual_info_chain),
        LawSpec(LawId.REL_CHAIN_RULE, _SUB1, True, _sample_rel_pair, _residual_rel_chain),
    ]
}


def law_q_range(law) -> tuple[float, float, bool]:
    spec = _REGISTRY[LawId(law)]
    r = spec.q_range
    return (r.lo, r.hi, r.hi_closed)


def law_is_identity(law) -> bool:
    return _REGISTRY[LawId(law)].identity


def law_slack(law, instance, q) -> float:
    """Slack of one law on one instance; the law asserts slack >= 0.

    For identity laws the slack is ``-|residual|`` so the same
    nonnegativity predicate applies (at the identity tolerance).
    Raises ``ValueError`` when q lies outside the law's documented range
    or the instance does not match the law's arity.
    """
    lid = LawId(law)
    spec = _REGISTRY[lid]
    qv = q_value(q)
    if not spec.q_range.contains(qv):
        raise ValueError(
            f"law {lid.value} is only asserted for q in {spec.q_range.describe()}, got {qv:g}"
        )
    value = spec.evaluate(instance, qv)
    return -abs(value) if spec.identity else value


# ---------------------------------------------------------------------------
# fuzz campaigns

@dataclass(frozen=True)
class SlackReport:
    """Summary of one seeded fuzz campaign."""

    law: str
    trials: int
    min_slack: float
    mean_slack: float
    violations: int
    seed: int
    tol: float
    identity: bool
    q_lo: float
    q_hi: float
    q_mean: float
    workers: int

    CSV_HEADER = "law,trials,min_slack,mean_slack,violations,seed"

    def passed(self) -> bool:
        return self.violations == 0

    def to_csv_row(self) -> str:
        return ",".join(
            [
                self.law,
                str(self.trials),
                f"{self.min_slack:.10g}",
                f"{self.mean_slack:.10g}",
                str(self.violations),
                str(self.seed),
            ]
        )

    def to_json_dict(self) -> dict:
        return {
            "law": self.law,
            "trials": self.trials,
            "min_slack": self.min_slack,
            "mean_slack": self.mean_slack,
            "violations": self.violations,
            "seed": self.seed,
            "tol": self.tol,
            "identity": self.identity,
            "q_range": [self.q_lo, self.q_hi],
            "q_mean": self.q_mean,
            "workers": self.workers,
        }


def fuzz(law, trials: int, q_range=None, seed: int = 0, *, tol=None, workers: int = 1) -> SlackReport:
    """Run a seeded random campaign for one law.

    Parameters
    ----------
    law : LawId or str
    trials : int
        Number of random instances (>= 1).
    q_range : (float, float), optional
        Sampling interval for q; it is intersected with the law's validity
        range and must leave a non-empty interval.  Defaults to the law's
        full range.  q is drawn uniformly from [lo, hi).
    seed : int
        Master seed; worker ``w`` draws from stream ``w``.
    tol : float, optional
        Violation threshold; defaults to 1e-9 for inequalities and 1e-10
        for identities.
    workers : int
        Number of deterministic trial partitions.  The report for a given
        worker count is bit-reproducible; changing the count changes which
        instances are drawn.
    """
    lid = LawId(law)
    spec = _REGISTRY[lid]
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if workers < 1:
        raise ValueError("workers must be >= 1")
    if tol is None:
        tol = TOL_IDENTITY if spec.identity else TOL_INEQUALITY

    lo, hi = (spec.q_range.lo, spec.q_range.hi) if q_range is None else map(float, q_range)
    lo = max(lo, spec.q_range.lo)
    hi = min(hi, spec.q_range.hi)
    if lo > hi or (lo == hi and not spec.q_range.contains(lo)):
        raise ValueError(
            f"q-range empty after intersecting with {spec.q_range.describe()} for {lid.value}"
        )

    workers = min(workers, trials)
    base, extra = divmod(trials, workers)
    min_slack = math.inf
    total = 0.0
    violations = 0
    q_total = 0.0
    for w in range(workers):
        chunk = base + (1 if w < extra else 0)
        rng = make_rng(seed, stream=w)
        for _ in range(chunk):
            qv = lo if lo == hi else float(rng.uniform(lo, hi))
            instance = spec.sample(rng)
            value = spec.evaluate(instance, qv)
            slack = -abs(value) if spec.identity else value
            if slack < min_slack:
                min_slack = slack
            total += slack
            if slack < -tol:
                violations += 1
            q_total += qv
    return SlackReport(
        law=lid.value,
        trials=trials,
        min_slack=float(min_slack),
        mean_slack=float(total / trials),
        violations=violations,
        seed=int(seed),
        tol=float(tol),
        identity=spec.identity,
        q_lo=lo,
        q_hi=hi,
        q_mean=q_total / trials,
        workers=workers,
    )


def all_laws() -> list[LawId]:
    return list(_REGISTRY)
