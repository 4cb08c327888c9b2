"""Covert feasibility search and the union-of-pentagons achievable region."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import minimize

from covertmac import qlinalg as ql
from covertmac.channel import CqTable
from covertmac.infomeasures import InputDistribution, RegionBounds, holevo_cmi, region_bounds


@dataclass(frozen=True)
class RegionConfig:
    covert_tol: float = 1e-6
    margin: float = 1e-3
    restarts: int = 8
    max_iters: int = 2000
    seed: int = 0
    covert: bool = True
    penalty: float = 10.0
    perturbations: int = 4
    perturb_scale: float = 0.05
    mu_grid: int = 101
    margin_terms: tuple = ("1", "2", "12")

    def __post_init__(self):
        if not self.covert_tol > 0:
            raise ValueError("covert_tol must be positive")
        if self.margin < 0:
            raise ValueError("margin must be nonnegative")
        if self.restarts < 1:
            raise ValueError("need at least one restart")
        if not set(self.margin_terms) <= {"1", "2", "12"}:
            raise ValueError(f"unknown margin terms {self.margin_terms}")


@dataclass(frozen=True, eq=False)
class RegionPentagon:
    dist: InputDistribution
    bounds: RegionBounds
    feasible: bool
    residual: float

    def vertices(self) -> list:
        """Corner points other than the origin, counter-clockwise from the R1 axis."""
        b1, b2 = self.bounds.b1, self.bounds.b2
        s = min(self.bounds.b12, b1 + b2)
        pts = [(b1, 0.0), (b1, max(s - b1, 0.0)), (max(s - b2, 0.0), b2), (0.0, b2)]
        out = []
        for p in pts:
            if not out or max(abs(p[0] - out[-1][0]), abs(p[1] - out[-1][1])) > 1e-12:
                out.append(p)
        return out

    def to_dict(self) -> dict:
        return {"dist": self.dist.to_dict(), "bounds": self.bounds.as_dict(), "feasible": self.feasible,
                "residual": self.residual}


@dataclass(frozen=True, eq=False)
class CovertRegionResult:
    pentagons: list
    frontier: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"pentagons": [p.to_dict() for p in self.pentagons], "frontier": [list(p) for p in self.frontier]}


def covertness_residual(table: CqTable, dist: InputDistribution) -> float:
    """``|| rho_E - rho0 ||_1`` for the single-letter warden state under ``dist``."""
    rho_E = np.tensordot(dist.joint(), table.e_states, axes=3)
    return ql.trace_norm(rho_E - table.rho0)


def _gaps(b: RegionBounds, terms) -> list:
    pairs = {"1": b.b1 - b.e1, "2": b.b2 - b.e2, "12": b.b12 - b.e12}
    return [pairs[t] for t in terms]


def _margins_met(b: RegionBounds, cfg: RegionConfig) -> bool:
    return all(g >= cfg.margin for g in _gaps(b, cfg.margin_terms))


def _check(table: CqTable, dist: InputDistribution, cfg: RegionConfig) -> tuple:
    bounds = region_bounds(table, dist)
    residual = covertness_residual(table, dist)
    if cfg.covert:
        feasible = residual <= cfg.covert_tol and _margins_met(bounds, cfg)
    else:
        feasible = True
    return bounds, residual, feasible


def pentagon(table: CqTable, dist: InputDistribution, cfg: RegionConfig = RegionConfig()) -> RegionPentagon:
    bounds, residual, feasible = _check(table, dist, cfg)
    return RegionPentagon(dist, bounds, feasible, residual)


class _Simplexes:
    """Softmax parameterization of ``(p1, p2, p3|12)``."""

    def __init__(self, sizes):
        self.k1, self.k2, self.k3 = sizes
        self.n1, self.n2 = self.k1, self.k2
        self.size = self.k1 + self.k2 + self.k1 * self.k2 * self.k3

    @staticmethod
    def _softmax(z, axis=-1):
        z = z - z.max(axis=axis, keepdims=True)
        e = np.exp(z)
        return e / e.sum(axis=axis, keepdims=True)

    def dist(self, theta) -> InputDistribution:
        p1 = self._softmax(theta[: self.k1])
        p2 = self._softmax(theta[self.k1: self.k1 + self.k2])
        p3 = self._softmax(theta[self.k1 + self.k2:].reshape(self.k1, self.k2, self.k3))
        return InputDistribution(p1, p2, p3)

    def logits(self, dist: InputDistribution) -> np.ndarray:
        def lg(p):
            return np.log(np.clip(p, 1e-300, None))

        return np.concatenate([lg(dist.p1), lg(dist.p2), lg(dist.p3_given_12).ravel()])


def _support_value(b: RegionBounds, mu: float) -> float:
    """``max mu R1 + (1 - mu) R2`` over the pentagon of ``b``."""
    s = min(b.b12, b.b1 + b.b2)
    if mu >= 0.5:
        return mu * b.b1 + (1 - mu) * max(s - b.b1, 0.0)
    return (1 - mu) * b.b2 + mu * max(s - b.b2, 0.0)


def _polish(table: CqTable, dist: InputDistribution, max_iters: int) -> InputDistribution:
    """Drive ``rho_E`` onto ``rho0`` by least squares over the simplices.

    First over ``p3|12`` with ``p1, p2`` held fixed (where ``rho_E`` is linear),
    then, if that leaves a residual, over all three factors jointly.
    """
    k1, k2, k3 = table.alphabet_sizes
    E = table.e_states
    rho0 = table.rho0
    scale = 1e6

    def from_vec(v):
        p1 = np.clip(v[:k1], 0, None)
        p2 = np.clip(v[k1:k1 + k2], 0, None)
        p3 = np.clip(v[k1 + k2:], 0, None).reshape(k1, k2, k3)
        p1, p2 = p1 / p1.sum(), p2 / p2.sum()
        p3 = p3 / p3.sum(axis=2, keepdims=True)
        return InputDistribution(p1, p2, p3)

    def split(v, fixed12):
        if fixed12:
            return dist.p1, dist.p2, v.reshape(k1, k2, k3)
        return v[:k1], v[k1:k1 + k2], v[k1 + k2:].reshape(k1, k2, k3)

    def objective(v, fixed12):
        p1, p2, p3 = split(v, fixed12)
        diff = np.tensordot(p1[:, None, None] * p2[None, :, None] * p3, E, axes=3) - rho0
        # d/dw_x of scale * ||sum_x w_x E_x - rho0||_F^2
        g = 2 * scale * np.real(np.einsum("abcij,ji->abc", E, diff))
        value = scale * float(np.real(np.vdot(diff, diff)))
        g3 = p1[:, None, None] * p2[None, :, None] * g
        if fixed12:
            return value, g3.ravel()
        g1 = np.einsum("j,ijk,ijk->i", p2, p3, g)
        g2 = np.einsum("i,ijk,ijk->j", p1, p3, g)
        return value, np.concatenate([g1, g2, g3.ravel()])

    def row_constraints(offset, size):
        cons = []
        for r in range(k1 * k2):
            sl = slice(offset + r * k3, offset + (r + 1) * k3)
            jac = np.zeros(size)
            jac[sl] = 1.0
            cons.append({"type": "eq", "fun": lambda v, sl=sl: v[sl].sum() - 1.0, "jac": lambda v, j=jac: j})
        return cons

    def block(sl, size):
        jac = np.zeros(size)
        jac[sl] = 1.0
        return {"type": "eq", "fun": lambda v: v[sl].sum() - 1.0, "jac": lambda v: jac}

    opts = {"maxiter": max_iters, "ftol": 1e-20}
    best = dist
    v3 = dist.p3_given_12.ravel().copy()
    if k3 > 1:
        res = minimize(objective, v3, args=(True,), jac=True, method="SLSQP", bounds=[(0, 1)] * v3.size,
                       constraints=row_constraints(0, v3.size), options=opts)
        cand = from_vec(np.concatenate([dist.p1, dist.p2, res.x]))
        if covertness_residual(table, cand) < covertness_residual(table, best):
            best = cand
    if covertness_residual(table, best) > 1e-9:
        v = np.concatenate([best.p1, best.p2, best.p3_given_12.ravel()])
        cons = [block(slice(0, k1), v.size), block(slice(k1, k1 + k2), v.size)] + row_constraints(k1 + k2, v.size)
        res = minimize(objective, v, args=(False,), jac=True, method="SLSQP", bounds=[(0, 1)] * v.size,
                       constraints=cons, options=opts)
        cand = from_vec(res.x)
        if covertness_residual(table, cand) < covertness_residual(table, best):
            best = cand
    return best


def _dist_key(d: InputDistribution) -> tuple:
    return tuple(np.round(np.concatenate([d.p1, d.p2, d.p3_given_12.ravel()]), 12))


def _dedupe(dists: list, tol: float = 1e-6) -> list:
    out = []
    for d in sorted(dists, key=_dist_key):
        if all(d.total_variation(o) > tol for o in out):
            out.append(d)
    return out


def find_feasible(table: CqTable, cfg: RegionConfig = RegionConfig()) -> list:
    """Multi-start local search for input distributions meeting the covert constraints.

    Each restart first drives the covertness residual down with Nelder-Mead
    over softmax logits and polishes it by constrained least squares. If the
    margins then fail, a second pass minimizes
    ``residual + penalty * sum(max(0, margin - (b_i - e_i)))`` and polishes again.
    An empty result does not prove infeasibility. With ``cfg.covert`` off every
    restart instead maximizes a weighted sum rate.
    """
    sx = _Simplexes(table.alphabet_sizes)
    rng = np.random.default_rng(cfg.seed)
    starts = [np.zeros(sx.size)] + [rng.normal(0.0, 1.5, sx.size) for _ in range(cfg.restarts - 1)]
    opts = {"maxiter": cfg.max_iters, "xatol": 1e-10, "fatol": 1e-14, "adaptive": True}

    def residual(theta):
        return covertness_residual(table, sx.dist(theta))

    def penalized(theta):
        d = sx.dist(theta)
        b = region_bounds(table, d)
        short = sum(max(0.0, cfg.margin - gap) for gap in _gaps(b, cfg.margin_terms))
        return covertness_residual(table, d) + cfg.penalty * short

    found = []
    for i, theta0 in enumerate(starts):
        if not cfg.covert:
            mu = 0.5 if cfg.restarts == 1 else i / (cfg.restarts - 1)
            res = minimize(lambda th: -_support_value(region_bounds(table, sx.dist(th)), mu), theta0,
                           method="Nelder-Mead", options=opts)
            found.append(sx.dist(res.x))
            continue
        d = _polish(table, sx.dist(minimize(residual, theta0, method="Nelder-Mead", options=opts).x),
                    cfg.max_iters)
        if covertness_residual(table, d) > cfg.covert_tol:
            continue
        if not pentagon(table, d, cfg).feasible:
            res = minimize(penalized, sx.logits(d), method="Nelder-Mead", options=opts)
            d = _polish(table, sx.dist(res.x), cfg.max_iters)
        if pentagon(table, d, cfg).feasible:
            found.append(d)
    return _dedupe(found)


def frontier(pentagons: list, mu_grid: int = 101, merge_tol: float = 1e-9) -> list:
    """Support-function sweep of the union: for each ``mu`` on the grid, the
    two extreme pentagon corners attaining ``max mu R1 + (1 - mu) R2``.
    Sorted by R1 ascending (ties by R2 descending), origin excluded. Points
    closer than ``merge_tol`` are merged.
    """
    if not pentagons:
        return []
    corners = [(round(r1, 12), round(r2, 12)) for p in pentagons for r1, r2 in p.vertices()]
    order = lambda p: (p[0], -p[1])  # noqa: E731
    pts = set()
    for mu in np.linspace(0.0, 1.0, mu_grid):
        vals = [mu * r1 + (1 - mu) * r2 for r1, r2 in corners]
        top = max(vals)
        tol = 1e-12 * max(1.0, abs(top))
        # ties at mu = 0 or 1 run along an axis-parallel edge; only its ends are corners
        tied = [c for c, v in zip(corners, vals) if v >= top - tol]
        pts.update((min(tied, key=order), max(tied, key=order)))
    pts.discard((0.0, 0.0))
    out = []
    for p in sorted(pts, key=order):
        if not out or max(abs(p[0] - out[-1][0]), abs(p[1] - out[-1][1])) > merge_tol:
            out.append(p)
    return out


def achievable_region(table: CqTable, cfg: RegionConfig = RegionConfig()) -> CovertRegionResult:
    sx = _Simplexes(table.alphabet_sizes)
    base = find_feasible(table, cfg)
    rng = np.random.default_rng([cfg.seed, 1])
    dists = list(base)
    for d in base:
        theta = sx.logits(d)
        for _ in range(cfg.perturbations):
            cand = sx.dist(theta + rng.normal(0.0, cfg.perturb_scale, sx.size))
            if cfg.covert:
                cand = _polish(table, cand, cfg.max_iters)
            dists.append(cand)
    pents = [pentagon(table, d, cfg) for d in _dedupe(dists)]
    pents = [p for p in pents if p.feasible]
    return CovertRegionResult(pents, frontier(pents, cfg.mu_grid))


@dataclass
class CorollaryReport:
    mode: str
    bounds: dict
    reduced: dict
    region: CovertRegionResult | None = None

    def to_dict(self) -> dict:
        out = {"mode": self.mode, "bounds": self.bounds, "reduced": self.reduced}
        if self.region is not None:
            out["region"] = self.region.to_dict()
        return out


MODES = ("no-helper-qmac", "classical-helper", "single-message")


def _on_r1_axis(region: CovertRegionResult, cfg: RegionConfig) -> CovertRegionResult:
    # no second message exists, so the R2 side of every pentagon is empty
    pents = [replace(p, bounds=replace(p.bounds, b2=0.0, e2=0.0)) for p in region.pentagons]
    return CovertRegionResult(pents, frontier(pents, cfg.mu_grid))


def corollary_reduction(
    table: CqTable,
    mode: str,
    cfg: RegionConfig = RegionConfig(),
    dist: InputDistribution | None = None,
) -> CorollaryReport:
    """Evaluate the region with registers trivialized as in the special cases.

    ``no-helper-qmac`` needs ``|X3| = 1`` and drops covertness;
    ``classical-helper`` drops covertness; ``single-message`` needs
    ``|X2| = 1``, keeps it, and zeroes the R2 side since there is no second
    message. With ``dist`` the bounds at that distribution
    are reported; otherwise the region is searched.
    """
    k1, k2, k3 = table.alphabet_sizes
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}")
    if mode == "no-helper-qmac" and k3 != 1:
        raise ValueError("no-helper-qmac needs a table with a single helper symbol")
    if mode == "single-message" and k2 != 1:
        raise ValueError("single-message needs a table with a single symbol for transmitter 2")
    if mode == "single-message":
        # transmitter 2 carries nothing, so its gap is vacuous
        run_cfg = replace(cfg, covert=True, margin_terms=("1", "12"))
    else:
        run_cfg = replace(cfg, covert=False)
    region = None
    if dist is None:
        region = achievable_region(table, run_cfg)
        if not region.pentagons:
            return CorollaryReport(mode, {}, {}, region)
        if mode == "single-message":
            region = _on_r1_axis(region, run_cfg)
        dist = max(region.pentagons, key=lambda p: p.bounds.b12).dist
    pent = pentagon(table, dist, run_cfg)
    if mode == "single-message":
        pent = _on_r1_axis(CovertRegionResult([pent]), run_cfg).pentagons[0]
    if mode == "no-helper-qmac":
        reduced = {
            "I(X1;B|X2)": holevo_cmi(table, dist, "B", {1}, {2}),
            "I(X2;B|X1)": holevo_cmi(table, dist, "B", {2}, {1}),
            "I(X1,X2;B)": holevo_cmi(table, dist, "B", {1, 2}),
        }
    elif mode == "single-message":
        reduced = {"I(X1,X3;B)": holevo_cmi(table, dist, "B", {1, 3}), "I(X1;E)": holevo_cmi(table, dist, "E", {1})}
    else:
        reduced = {
            "I(X1,X3;B|X2)": pent.bounds.b1,
            "I(X2,X3;B|X1)": pent.bounds.b2,
            "I(X1,X2,X3;B)": pent.bounds.b12,
        }
    bounds = {**pent.bounds.as_dict(), "feasible": pent.feasible, "residual": pent.residual}
    return CorollaryReport(mode, bounds, reduced, region)
