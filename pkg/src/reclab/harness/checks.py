"""Per-trial check runners. Each returns a list of :class:`TrialRecord`."""

from __future__ import annotations

import math
import time
import warnings

import numpy as np

from ..channels import (
    Channel,
    conditional_expectation_pair,
    identity_channel,
    random_davies,
    random_unital_cp_channel,
    semigroup_step,
)
from ..divergences import fidelity
from ..gamma import (
    InstanceBundle,
    averaged_fidelity_check,
    averaged_renyi_check,
    a_term_derivative,
    build_V_eta,
    build_V_psi,
    chain_identity_residual,
    dpi_limit_check,
    hirsch_check,
    jensen_check,
    recovered_dominance_check,
    norm_distance_check,
    recovery_for,
    norm_bound_check,
    fidelity_bound_check,
)
from ..quadrature import QuadratureError
from ..quantum import State, relative_entropy
from ..recovery import RecoverySpec, SupportWarning, averaged_recovery, recovered_density, theta_conjugate
from ..regularize import gaussian_regularize, power_dominance, regularized_entropy_convergence
from ..rng import make_rng, mix64, random_density
from .config import ExperimentConfig
from .records import TrialRecord, digest

LEMMA_MON_TS = (0.0, 0.5, -0.5, 2.0, -2.0, 4.0, -4.0)
LIMIT_THETAS = (1e-2, 1e-3)
# below this the gap is roundoff amplified by 1/theta, so no trend is expected
LIMIT_FLOOR = 1e-9
HIRSCH_THETA = 0.25
CONDEXP_DIMS = ((2, 2), (2, 3), (3, 2))
DAVIES_GRID = [(n, beta, t) for n in (2, 3) for beta in (0.0, 0.5, 2.0) for t in (0.1, 1.0, 10.0)]
DAVIES_ROTATIONS = (-3.0, 0.0, 1.5)
REGULARIZE_P_GRID = (1.0, 4.0, 16.0, 64.0, 256.0)
STRICT = 0.0


class _Ctx:
    """Shared per-trial data: seed, dims and a record factory."""

    def __init__(self, cfg: ExperimentConfig, trial: int):
        self.cfg = cfg
        self.trial = trial
        self.seed = mix64(cfg.seed, trial)
        self.dims = tuple(cfg.dims[trial % len(cfg.dims)])
        self.digest = ""

    def record(self, check, lhs, rhs, tol, *, slack=None, status="", cert=0.0, note="", dims=None):
        slack = (lhs - rhs) if slack is None else slack
        return TrialRecord(
            check=check, trial=self.trial, seed=self.seed, dims=dims or self.dims,
            digest=self.digest, lhs=lhs, rhs=rhs, slack=slack, tol=tol, status=status,
            cert_residual=cert, note=note,
        )

    def vacuous(self, check, lhs, rhs, note="infinite relative entropy"):
        return self.record(check, lhs, rhs, 0.0, slack=math.inf, status="vacuous-infinite", note=note)


def make_instance(ctx: _Ctx, faithful: bool = True) -> InstanceBundle:
    """Instance for a trial; with ``faithful=False`` singular states are injected."""
    cfg = ctx.cfg
    rng = make_rng(ctx.seed)
    n, m, d = ctx.dims
    if cfg.fixture == "identity":
        T = identity_channel(n)
        rho = random_density(rng, n)
        inst = InstanceBundle(T, State(rho), State(rho))
    else:
        T = random_unital_cp_channel(n, m, d, rng)
        rank_rho = rank_sigma = None
        if not faithful and n > 1 and rng.random() < cfg.singular_rate:
            if rng.random() < 0.5:
                rank_rho = n - 1
            else:
                rank_sigma = n - 1
        rho = random_density(rng, n, rank_rho)
        sigma = random_density(rng, n, rank_sigma)
        inst = InstanceBundle(T, State(rho), State(sigma))
    ctx.digest = digest(inst.channel.choi, inst.rho_A.density, inst.sigma_A.density)
    return inst


def run_dpi(ctx: _Ctx) -> list[TrialRecord]:
    inst = make_instance(ctx, faithful=False)
    lhs, rhs = inst.entropy_A, inst.entropy_B
    if not math.isfinite(lhs):
        return [ctx.vacuous("dpi", lhs, rhs)]
    return [ctx.record("dpi", lhs, rhs, ctx.cfg.tol("dpi_tol"))]


def run_norm_bound(ctx: _Ctx) -> list[TrialRecord]:
    cfg = ctx.cfg
    inst = make_instance(ctx)
    out = []
    if not inst.finite:
        return [ctx.vacuous(f"thm1[q={q:g}]", math.inf, math.nan) for q in cfg.q_list]
    V_eta = build_V_eta(inst)
    for q in cfg.q_list:
        name = f"thm1[q={q:g}]"
        try:
            res = norm_bound_check(inst, q, cfg.quadrature, V_eta, cfg.tol("cert_tol"))
        except QuadratureError as exc:
            out.append(ctx.record(name, inst.delta_S, math.nan, cfg.tol("slack_tol"),
                                  slack=math.nan, cert=exc.residual, note=str(exc)))
            continue
        out.append(ctx.record(name, res.lhs, res.rhs, cfg.tol("slack_tol"), cert=res.cert_residual))
    return out


def run_fidelity_bound(ctx: _Ctx) -> list[TrialRecord]:
    cfg = ctx.cfg
    inst = make_instance(ctx)
    tol = cfg.tol("slack_tol")
    names = ["thm2", "thm2.norm_distance", "thm2.averaged_fidelity"]
    names += [f"thm2.renyi_averaged[s={s:g}]" for s in cfg.s_list]
    names += [f"thm2.renyi_recovered[s={s:g}]" for s in cfg.s_list]
    if not inst.finite:
        return [ctx.vacuous(name, math.inf, math.nan) for name in names]
    try:
        alpha, residual = recovery_for(inst, cfg.quadrature, cfg.tol("cert_tol"))
    except QuadratureError as exc:
        return [ctx.record(name, inst.delta_S, math.nan, tol, slack=math.nan, cert=exc.residual,
                           note=str(exc)) for name in names]
    out = []
    r = fidelity_bound_check(inst, alpha, residual)
    out.append(ctx.record("thm2", r.lhs, r.rhs, tol, cert=residual))
    r = norm_distance_check(inst, alpha)
    out.append(ctx.record("thm2.norm_distance", r.lhs, r.rhs, tol, cert=residual))
    r = averaged_fidelity_check(inst, cfg.quadrature, cfg.tol("cert_tol"))
    out.append(ctx.record("thm2.averaged_fidelity", r.lhs, r.rhs, tol, cert=r.cert_residual))
    for s in cfg.s_list:
        r = averaged_renyi_check(inst, s, cfg.quadrature, cfg.tol("cert_tol"))
        out.append(ctx.record(f"thm2.renyi_averaged[s={s:g}]", r.lhs, r.rhs, tol, cert=r.cert_residual))
    for s in cfg.s_list:
        r = jensen_check(inst, alpha, s)
        out.append(ctx.record(f"thm2.renyi_recovered[s={s:g}]", r.lhs, r.rhs, tol, cert=residual))
    return out


def run_dominance(ctx: _Ctx) -> list[TrialRecord]:
    inst = make_instance(ctx)
    eigs = recovered_dominance_check(inst, LEMMA_MON_TS)
    worst = float(eigs.min())
    t_worst = LEMMA_MON_TS[int(np.argmin(eigs))]
    return [ctx.record("lemma_mon", worst, 0.0, ctx.cfg.tol("psd_tol"), note=f"worst t={t_worst:g}")]


def run_limit(ctx: _Ctx) -> list[TrialRecord]:
    inst = make_instance(ctx)
    if not inst.finite:
        return [ctx.vacuous(f"limit[q={q:g}]", math.inf, math.nan) for q in ctx.cfg.q_list]
    V_psi = build_V_psi(inst)
    out = []
    a_term = a_term_derivative(inst)
    for q in ctx.cfg.q_list:
        coarse, fine = (dpi_limit_check(inst, q, th, V_psi) for th in LIMIT_THETAS)
        bound = 1e-2 * (1.0 + abs(inst.delta_S))
        note = f"gap(1e-2)={coarse.gap:.3e} gap(1e-3)={fine.gap:.3e} a_term={a_term:.12g}"
        out.append(ctx.record(f"limit[q={q:g}]", bound, abs(fine.gap), STRICT, note=note))
        trend = abs(coarse.gap) - abs(fine.gap)
        out.append(ctx.record(f"limit.trend[q={q:g}]", abs(coarse.gap), abs(fine.gap), STRICT,
                              status="pass" if trend > 0 or abs(fine.gap) < LIMIT_FLOOR else "fail",
                              note=note))
    return out


def run_hirsch(ctx: _Ctx) -> list[TrialRecord]:
    cfg = ctx.cfg
    inst = make_instance(ctx)
    V_psi = build_V_psi(inst)
    out = []
    for q in cfg.q_list:
        name = f"hirsch[q={q:g}]"
        try:
            r = hirsch_check(inst, HIRSCH_THETA, q, cfg.quadrature, V_psi, cfg.tol("cert_tol"))
        except QuadratureError as exc:
            out.append(ctx.record(name, math.nan, math.nan, cfg.tol("slack_tol"), slack=math.nan,
                                  cert=exc.residual, note=str(exc)))
            continue
        out.append(ctx.record(name, r.lhs, r.rhs, cfg.tol("slack_tol"), cert=r.cert_residual))
    return out


def condexp_records(ctx: _Ctx) -> list[TrialRecord]:
    n_b, n_e = CONDEXP_DIMS[ctx.trial % len(CONDEXP_DIMS)]
    rng = make_rng(ctx.seed)
    incl, expct = conditional_expectation_pair(n_b, n_e)
    rho_b_ref = random_density(rng, n_b)
    sigma = State(np.kron(rho_b_ref, np.eye(n_e) / n_e))
    rho = State(random_density(rng, n_b * n_e))
    ctx.digest = digest(rho.density, sigma.density)
    dims = (n_b * n_e, n_b, n_e)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", SupportWarning)
        res = averaged_recovery(RecoverySpec(incl, sigma, ctx.cfg.quadrature), ctx.cfg.tol("cert_tol"))
    dist = res.channel.choi_distance(expct)
    out = [ctx.record("examples.condexp.recovery", 1e-9, dist, STRICT, cert=res.residual, dims=dims,
                      note="Choi distance to the conditional expectation")]
    chain = chain_identity_residual(rho, n_b, n_e, rho_b_ref)
    out.append(ctx.record("examples.condexp.chain", 1e-8, chain, STRICT, dims=dims,
                          note="entropy chain identity residual"))
    inst = InstanceBundle(incl, rho, sigma)
    rec = recovered_density(incl, expct, rho)
    rhs = -2.0 * np.log(fidelity(rec, rho))
    out.append(ctx.record("examples.condexp.bound", inst.delta_S, rhs, ctx.cfg.tol("slack_tol"), dims=dims))
    return out


def davies_records(ctx: _Ctx) -> list[TrialRecord]:
    n, beta, t = DAVIES_GRID[ctx.trial]
    semigroup = random_davies(n, beta, ctx.seed)
    T = semigroup_step(semigroup, t)
    rho = State(random_density(make_rng(mix64(ctx.seed, 1)), n))
    ctx.digest = digest(semigroup.hamiltonian, rho.density)
    dims = (n, n, 0)
    target = theta_conjugate(T, semigroup.theta_basis)
    spec = RecoverySpec(T, semigroup.sigma, ctx.cfg.quadrature)
    dists = [Channel(n, n, c).choi_distance(target) for c in spec.rotated_petz_batch(DAVIES_ROTATIONS)]
    res = averaged_recovery(spec, ctx.cfg.tol("cert_tol"))
    dists.append(res.channel.choi_distance(target))
    note = f"n={n} beta={beta:g} t={t:g}"
    out = [ctx.record("examples.davies.petz", ctx.cfg.tol("choi_tol"), max(dists), STRICT,
                      cert=res.residual, dims=dims, note=note)]
    rec = recovered_density(T, target, rho)
    lhs = relative_entropy(rho, semigroup.sigma) - relative_entropy(T.predual(rho.density), semigroup.sigma)
    rhs = -2.0 * np.log(fidelity(rec, rho))
    out.append(ctx.record("examples.davies.entropy_production", lhs, rhs, ctx.cfg.tol("slack_tol"),
                          dims=dims, note=note))
    return out


def run_examples(ctx: _Ctx) -> list[TrialRecord]:
    if ctx.cfg.fixture is not None:
        return [ctx.record("examples", math.nan, math.nan, 0.0, slack=math.nan, status="skipped",
                           note=f"not applicable to the {ctx.cfg.fixture} fixture")]
    out = condexp_records(ctx)
    if ctx.trial < len(DAVIES_GRID):
        out += davies_records(ctx)
    return out


def run_regularize(ctx: _Ctx) -> list[TrialRecord]:
    rng = make_rng(ctx.seed)
    n = 2
    if ctx.cfg.fixture == "identity":
        rho = sigma = random_density(rng, n)
    else:
        rho, sigma = random_density(rng, n), random_density(rng, n)
    ctx.digest = digest(rho, sigma)
    dims = (n, n, 0)
    rows = regularized_entropy_convergence(rho, sigma, REGULARIZE_P_GRID)
    gap = rows[-1].gap
    out = [ctx.record("regularize.gap", ctx.cfg.tol("regularize_gap"), gap, STRICT, dims=dims,
                      note=" ".join(f"P={r.P:g}:{r.gap:.3e}" for r in rows))]
    trend = rows[-2].gap - rows[-1].gap
    out.append(ctx.record("regularize.trend", rows[-2].gap, rows[-1].gap, STRICT, dims=dims,
                          status="pass" if trend > 0 or rows[-1].gap < 1e-12 else "fail"))
    worst_norm, worst_dom, worst_c = 0.0, np.inf, 0.0
    for P in REGULARIZE_P_GRID:
        reg = gaussian_regularize(rho, sigma, P)
        worst_norm = max(worst_norm, float(np.linalg.norm(reg.a_P, 2)))
        worst_c = max(worst_c, reg.majorization)
        worst_dom = min(worst_dom, *(power_dominance(reg, a) for a in (0.25, 0.5, 0.75)))
    out.append(ctx.record("regularize.a_norm", 1.0, worst_norm, ctx.cfg.tol("norm_tol"), dims=dims))
    out.append(ctx.record("regularize.dominance", worst_dom, 0.0, 1e-8, dims=dims))
    out.append(ctx.record("regularize.majorization", 0.0, 0.0, STRICT, dims=dims,
                          status="pass" if math.isfinite(worst_c) else "fail", note=f"max c_P={worst_c:.6g}"))
    return out


RUNNERS = {
    "dpi": run_dpi,
    "thm1": run_norm_bound,
    "thm2": run_fidelity_bound,
    "lemma_mon": run_dominance,
    "limit": run_limit,
    "hirsch": run_hirsch,
    "examples": run_examples,
    "regularize": run_regularize,
}


def run_trial(cfg: ExperimentConfig, check: str, trial: int) -> list[TrialRecord]:
    ctx = _Ctx(cfg, trial)
    start = time.perf_counter()
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", SupportWarning)
        with np.errstate(divide="ignore", invalid="ignore"):
            records = RUNNERS[check](ctx)
    elapsed = time.perf_counter() - start
    for r in records:
        r.wall_time = elapsed
    return records
