"""Monte Carlo packing and resolvability experiments with their analytic bounds."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from covertmac import qlinalg as ql
from covertmac.channel import CqTable, conditional_average, marginals
from covertmac.infomeasures import (
    InputDistribution,
    count_distinct,
    cq_sandwiched_renyi,
    holevo_cmi,
    quantum_rel_entropy,
    von_neumann_entropy,
)
from covertmac.codingsim.codebook import (
    SimParams,
    codebook_rng,
    generate_codebook,
    receiver_state,
    tensor_power_state,
    warden_state,
)
from covertmac.codingsim.decoder import build_srm_decoder, exact_error
from covertmac.codingsim.typical import cond_typical_projector, typical_projector


@dataclass
class SimReport:
    """Per-codebook outcomes, their aggregates and the analytic bound of the run.

    Lists are indexed by codebook; entries are ``None`` where the metric was
    not computed by the experiment.
    """

    kind: str
    n: int
    R1: float
    R2: float
    message_counts: tuple
    error: list = field(default_factory=list)
    trace_distance: list = field(default_factory=list)
    rel_entropy: list = field(default_factory=list)
    mean: float = float("nan")
    stderr: float = float("nan")
    bound: float = float("nan")
    bound_terms: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)


def _aggregate(values) -> tuple:
    a = np.asarray(values, dtype=float)
    mean = float(a.mean())
    stderr = float(a.std(ddof=1) / math.sqrt(a.size)) if a.size > 1 else 0.0
    return mean, stderr


def covertness_report(cb, table: CqTable, dist: InputDistribution) -> tuple:
    """``(||rho_{E^n} - rho0^{(x)n}||_1, D(rho_{E^n} || rho_E^{(x)n}))`` for one codebook."""
    rho_En = warden_state(cb, table)
    n = cb.n
    td = ql.trace_norm(rho_En - tensor_power_state(table.rho0, n))
    rho_E = marginals(table, dist).rho_E
    rel = quantum_rel_entropy(rho_En, tensor_power_state(rho_E, n))
    return min(td, 2.0), rel


def resolvability_bound(table: CqTable, dist: InputDistribution, n: int, R1: float, R2: float, alpha: float) -> dict:
    """Analytic upper bound on the expected warden divergence, in bits.

    ``v^a / (a ln 2) * sum_k 2^{a n (D_{1+a,k} - rate_k)}`` with ``v`` the number
    of distinct eigenvalues of ``rho_E^{(x)n}`` and ``D_{1+a,k}`` the sandwiched
    Renyi informations of ``(X1 X2 X3; E)``, ``(X2; E)`` and ``(X1; E)``.
    """
    joint = dist.joint()
    m = marginals(table, dist)
    rho_E = m.rho_E
    lam = np.clip(np.linalg.eigvalsh(rho_E), 0.0, None)
    prod = lam
    for _ in range(n - 1):
        prod = np.multiply.outer(prod, lam).ravel()
    v = count_distinct(prod)
    idx = list(np.ndindex(*joint.shape))
    d_all = cq_sandwiched_renyi([joint[i] for i in idx], [table.e_states[i] for i in idx], rho_E, alpha)
    d_2 = cq_sandwiched_renyi(dist.p2, m.e_given[1], rho_E, alpha)
    d_1 = cq_sandwiched_renyi(dist.p1, m.e_given[0], rho_E, alpha)
    terms = {
        "sum": 2.0 ** (alpha * n * (d_all - (R1 + R2))),
        "R2": 2.0 ** (alpha * n * (d_2 - R2)),
        "R1": 2.0 ** (alpha * n * (d_1 - R1)),
    }
    bound = v ** alpha / (alpha * math.log(2)) * sum(terms.values())
    return {
        "bound": bound,
        "v_E": v,
        "v_E_cap": (n + 1) ** table.d_E,
        "renyi_sum": d_all,
        "renyi_x2": d_2,
        "renyi_x1": d_1,
        **{f"term_{k}": t for k, t in terms.items()},
    }


def resolvability_experiment(table: CqTable, dist: InputDistribution, params: SimParams) -> SimReport:
    rep = SimReport("resolvability", params.n, params.R1, params.R2, params.message_counts)
    for i in range(params.num_codebooks):
        cb = generate_codebook(dist, params, codebook_rng(params.seed, i))
        td, rel = covertness_report(cb, table, dist)
        rep.trace_distance.append(td)
        rep.rel_entropy.append(rel)
    rep.mean, rep.stderr = _aggregate(rep.rel_entropy)
    terms = resolvability_bound(table, dist, params.n, params.R1, params.R2, params.alpha)
    rep.bound = terms.pop("bound")
    rep.bound_terms = terms
    return rep


def packing_entropies(table: CqTable, dist: InputDistribution) -> dict:
    """``H(B)``, ``H(B|X1)``, ``H(B|X2)`` and ``H(B|X1,X2,X3)`` in bits."""
    joint = dist.joint()

    def cond(axes):
        total = 0.0
        for sym in np.ndindex(*[joint.shape[a] for a in axes]):
            mass, avg = conditional_average(table.b_states, joint, axes, sym)
            if mass > 0:
                total += mass * von_neumann_entropy(avg)
        return total

    return {"H_B": cond(()), "H_B_X1": cond((0,)), "H_B_X2": cond((1,)), "H_B_X123": cond((0, 1, 2))}


def packing_bound(ent: dict, n: int, R1: float, R2: float, typ_defect: float, delta: float) -> dict:
    """Error bound ``eps_n + 4 * (three exponential terms)`` with stand-ins
    ``eps_n = 2 (a + 3 sqrt(a))`` (``a`` the measured typicality defect) and
    ``eps'_n = delta``.
    """
    a = max(typ_defect, 0.0)
    eps = 2 * (a + 3 * math.sqrt(a))
    b0 = ent["H_B_X123"]
    terms = {
        "R1": 2.0 ** (-n * (ent["H_B_X2"] - b0 - R1 - delta)),
        "R2": 2.0 ** (-n * (ent["H_B_X1"] - b0 - R2 - delta)),
        "sum": 2.0 ** (-n * (ent["H_B"] - b0 - R1 - R2 - delta)),
    }
    return {"bound": eps + 4 * sum(terms.values()), "eps_n": eps, "eps_prime_n": delta, "typ_defect": a,
            **{f"term_{k}": t for k, t in terms.items()}}


def typicality_defect(cb, table: CqTable, dist: InputDistribution, delta: float) -> float:
    """Mean over message pairs of ``max(1 - tr[P rho_m], 1 - tr[P_m rho_m])``."""
    P = typical_projector(marginals(table, dist).rho_B, cb.n, delta)
    vals = []
    for m1, m2 in cb.pairs():
        word = cb.codeword(m1, m2)
        rho = receiver_state(cb, m1, m2, table)
        Pm = cond_typical_projector(table, dist, *word, {1, 2, 3}, delta, nested=False)
        vals.append(max(1 - np.trace(P @ rho).real, 1 - np.trace(Pm @ rho).real))
    return float(np.mean(vals))


def packing_experiment(table: CqTable, dist: InputDistribution, params: SimParams) -> SimReport:
    rep = SimReport("packing", params.n, params.R1, params.R2, params.message_counts)
    defects = []
    for i in range(params.num_codebooks):
        cb = generate_codebook(dist, params, codebook_rng(params.seed, i))
        dec = build_srm_decoder(cb, table, dist, params.delta)
        rep.error.append(exact_error(cb, dec, table))
        defects.append(typicality_defect(cb, table, dist, params.delta))
    rep.mean, rep.stderr = _aggregate(rep.error)
    terms = packing_bound(packing_entropies(table, dist), params.n, params.R1, params.R2,
                          float(np.mean(defects)), params.delta)
    rep.bound = terms.pop("bound")
    rep.bound_terms = terms
    return rep


def rate_thresholds(table: CqTable, dist: InputDistribution) -> dict:
    """Decoding bounds (receiver) and resolvability thresholds (warden), in bits."""
    return {
        "b1": holevo_cmi(table, dist, "B", {1, 3}, {2}),
        "b2": holevo_cmi(table, dist, "B", {2, 3}, {1}),
        "b12": holevo_cmi(table, dist, "B", {1, 2, 3}),
        "e1": holevo_cmi(table, dist, "E", {1}),
        "e2": holevo_cmi(table, dist, "E", {2}),
        "e12": holevo_cmi(table, dist, "E", {1, 2, 3}),
    }
