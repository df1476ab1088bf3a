"""Curvature continuation: deform a tall generalized polytope until its
vertex curvatures vanish.

The target path is kappa(t) = t * kappa(1).  Starting from equal radii
large enough that the polytope is valid and strictly inside the good
region, each step predicts with the curvature Jacobian, then corrects
with Newton; the triangulation is re-flipped to weighted Delaunay (q =
r^2) after every Newton update, so combinatorial surgery happens exactly
where the deformation crosses a flat edge.  Failed steps roll back and
halve the step size.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import jacobian
from .errors import (
    FlipError,
    InadmissibleWeightsError,
    PyramidError,
    SolverAbort,
    StepReductionError,
    TriangleError,
)
from .polytope import GeneralizedPolytope, solve_pyramids
from .surface import PolyhedralMetric
from .triangulation import CornerMesh, weighted_delaunay

_REJECTABLE = (
    PyramidError,
    StepReductionError,
    InadmissibleWeightsError,
    TriangleError,
    FlipError,
    np.linalg.LinAlgError,
)

# Flat-limit endgame.  Degenerate (2-dimensional) limits break Newton in
# two independent ways, handled separately:
#
#  * curvature noise: a kappa evaluation carries error of order
#    eps * sigma_max(J) * |r|, and sigma_max blows up approaching a flat
#    body.  The Newton tolerance is floored at FLOOR_C times that level
#    (always, not just in the endgame), and the path may terminate once
#    the target itself drops below the floor -- the best representable
#    approximation of the flat body.
#  * kernel collapse: cond(J) grows like 1/t^2 along the path itself,
#    not because a step was too large.  Once the accepted state is
#    beyond COND_ENDGAME, rejecting cannot help; Newton switches to a
#    truncated pseudo-inverse so the emerging kernel directions are
#    frozen instead of amplified.
#
# Nondegenerate paths trip neither mechanism.
COND_ENDGAME = 1e12
SIGMA_TRUNC = 1e-13
FLOOR_C = 64.0
_EPS = float(np.finfo(np.float64).eps)


def _truncated_solve(J, rhs):
    """Least-squares solve dropping the near-kernel; returns (x, sigma_max)."""
    u, sigma, vt = np.linalg.svd(J)
    inv = np.where(sigma > SIGMA_TRUNC * sigma[0], 1.0 / sigma, 0.0)
    return vt.T @ (inv * (u.T @ rhs)), float(sigma[0])


def _kappa_floor(sigma_max, r):
    return FLOOR_C * _EPS * sigma_max * max(1.0, float(np.abs(r).max()))


@dataclass
class SolverOptions:
    kappa_stop: float = 1e-9  # stop at t where |kappa| = this * |kappa(1)|
    newton_tol: float = 1e-10  # * max(1, |kappa(1)|_inf)
    dt_init: float = 1.0 / 64.0
    dt_min: float = 1e-12
    max_newton: int = 8
    max_steps: int = 100000
    growth: float = 1.5
    sigma_ratio_min: float = 1e-12
    radius_cap: float = 2.0  # * initial radius
    seed_doublings: int = 60
    flip_flat_tol: float | None = None  # debug: flips must occur this close to pi
    debug: bool = False
    progress: object = None  # callable(dict) per accepted step
    observer: object = None  # callable(state) at t=1 and after each accepted step

    def __post_init__(self):
        if not (0.0 < self.kappa_stop < 1e-3):
            raise ValueError("kappa_stop must lie in (0, 1e-3)")


@dataclass
class FlipEvent:
    t: float  # path time of the step during which the flip fired
    edge: tuple  # sorted endpoint labels
    theta: float  # total dihedral along the edge just before the flip

    def as_dict(self):
        return {"t": self.t, "edge": list(self.edge), "theta": self.theta}


@dataclass
class StepResult:
    accepted: bool
    reason: str = ""
    newton_iters: int = 0
    flips: int = 0


@dataclass
class ContinuationState:
    metric: PolyhedralMetric
    mesh: CornerMesh
    r: np.ndarray
    t: float
    kappa1: np.ndarray
    r_init: float
    P: GeneralizedPolytope
    J: np.ndarray | None
    newton_tol: float
    flips: int = 0
    newton_total: int = 0
    steps_accepted: int = 0
    steps_rejected: int = 0
    records: list = field(default_factory=list)
    events: list = field(default_factory=list)
    last_cond: float = float("nan")
    last_sigma_max: float = float("nan")
    floor_stop: bool = False  # terminated at the precision floor (flat limit)

    def dump(self, reason=""):
        """JSON-ready snapshot for post-mortem inspection."""
        return {
            "reason": reason,
            "t": self.t,
            "r": self.r.tolist(),
            "kappa1": self.kappa1.tolist(),
            "r_init": self.r_init,
            "flips": self.flips,
            "steps_accepted": self.steps_accepted,
            "steps_rejected": self.steps_rejected,
            "mesh": json.loads(self.mesh.to_json()),
            "events": [e.as_dict() for e in self.events],
        }


def choose_initial_radius(metric: PolyhedralMetric, mesh: CornerMesh, opts=None):
    """Double an equal radius until the generalized polytope exists and
    sits strictly inside the admissible cone:

      (a) every face carries a pyramid,
      (b) 0 < kappa_i < delta_i at every vertex,
      (c) every vertex sees total curvature > 2*pi at the others.
    """
    opts = opts or SolverOptions()
    radius = float(mesh.ell.max())
    n = mesh.n_vertices
    for _ in range(opts.seed_doublings):
        try:
            P = GeneralizedPolytope(
                mesh, np.full(n, radius), deficits=metric.deficits, validate=False
            )
        except _REJECTABLE:
            radius *= 2.0
            continue
        kappa = P.kappa
        total = float(kappa.sum())
        if (
            np.all(kappa > 0.0)
            and np.all(kappa < metric.deficits)
            and total - float(kappa.max()) > 2.0 * math.pi
        ):
            return radius, P
        radius *= 2.0
    raise SolverAbort(
        f"no valid starting radius after {opts.seed_doublings} doublings"
    )


def _edge_theta(mesh, r, f, s):
    """Total dihedral along edge (f, s) for the current radii."""
    g, s2 = mesh.neighbor(f, s)
    faces = np.array([f, g])
    batch = solve_pyramids(mesh.ell[faces], np.asarray(r)[mesh.vert[faces]])
    return float(batch.alpha[0, s] + batch.alpha[1, s2])


def step(state: ContinuationState, t_new: float, opts: SolverOptions) -> StepResult:
    """One predictor/corrector step from state.t down to t_new.

    Mutates the state only on acceptance.
    """
    target = t_new * state.kappa1
    dt = state.t - t_new
    mesh = state.mesh.copy()
    r = state.r.copy()
    buffer = []
    flips_here = 0

    def hook(m, f, s):
        theta = _edge_theta(m, r, f, s)
        if opts.flip_flat_tol is not None and abs(theta - math.pi) > opts.flip_flat_tol:
            raise StepReductionError(
                f"flip executed at theta {theta!r}, not within "
                f"{opts.flip_flat_tol} of pi"
            )
        i, j = m.edge_endpoints(f, s)
        buffer.append(FlipEvent(t=t_new, edge=tuple(sorted((i, j))), theta=theta))

    endgame = not math.isfinite(state.last_cond) or state.last_cond > COND_ENDGAME
    sigma_ref = state.last_sigma_max

    try:
        if state.J is None:
            raise StepReductionError("no Jacobian available at the current state")
        if endgame:
            delta, sigma_ref = _truncated_solve(state.J, state.kappa1)
            r = r - dt * delta
        else:
            r = r - dt * np.linalg.solve(state.J, state.kappa1)

        iters = 0
        while True:
            iters += 1
            flips_here += weighted_delaunay(
                mesh, r * r, debug=opts.debug, on_flip=hook
            )
            P = GeneralizedPolytope(
                mesh, r, deficits=state.metric.deficits, validate=False
            )
            residual = P.kappa - target
            # Curvature evaluations carry noise of order
            # eps * sigma_max * |r|; asking Newton for better than that
            # livelocks near flat limits, where sigma_max blows up.
            tol = state.newton_tol
            if math.isfinite(sigma_ref):
                tol = max(tol, _kappa_floor(sigma_ref, r))
            if float(np.abs(residual).max()) <= tol:
                break
            if iters >= opts.max_newton:
                return _reject(state, f"no convergence in {opts.max_newton} iterations")
            J = jacobian.assemble(P)
            if endgame:
                delta, sigma_ref = _truncated_solve(J, residual)
                r = r - delta
            else:
                u, sigma, vt = np.linalg.svd(J)
                if sigma[-1] < opts.sigma_ratio_min * sigma[0]:
                    return _reject(state, "curvature Jacobian is numerically singular")
                r = r - vt.T @ ((u.T @ residual) / sigma)
    except _REJECTABLE as exc:
        return _reject(state, f"{type(exc).__name__}: {exc}")

    # Invariants at the accepted state.
    kappa = P.kappa
    slack = tol
    if np.any(kappa < -slack) or np.any(kappa > state.metric.deficits + slack):
        return _reject(state, "curvature left the admissible band")
    if float(np.abs(r).max()) > opts.radius_cap * state.r_init:
        return _reject(state, "radii escaped the initial bound")
    rep = P.curvature_report()
    if np.any(rep.theta > math.pi + 1e-9):
        return _reject(state, "edge dihedral exceeded pi")
    prev_total = float(state.P.kappa.sum())
    if float(kappa.sum()) > prev_total + 1e-12 + 2 * kappa.size * slack:
        return _reject(state, "spherical section area decreased")

    try:
        state.J = jacobian.assemble(P)
        u, sigma, vt = np.linalg.svd(state.J)
        state.last_cond = float(sigma[0] / sigma[-1])
        state.last_sigma_max = float(sigma[0])
    except _REJECTABLE:
        # Keep the accepted state but mark the Jacobian unusable; only
        # happens at extremely flat final states.
        state.J = None
        state.last_cond = float("inf")

    state.mesh = mesh
    state.r = r
    state.t = t_new
    state.P = P
    state.flips += flips_here
    state.newton_total += iters
    state.steps_accepted += 1
    state.events.extend(buffer)
    record = {
        "t": t_new,
        "kappa_inf": float(np.abs(kappa).max()),
        "flips_so_far": state.flips,
        "newton_iters": iters,
        "cond": state.last_cond if math.isfinite(state.last_cond) else None,
    }
    state.records.append(record)
    if opts.progress is not None:
        opts.progress(record)
    return StepResult(accepted=True, newton_iters=iters, flips=flips_here)


def _reject(state, reason):
    state.steps_rejected += 1
    return StepResult(accepted=False, reason=reason)


@dataclass
class SolveResult:
    polytope: GeneralizedPolytope
    state: ContinuationState

    @property
    def r(self):
        return self.state.r

    @property
    def mesh(self):
        return self.state.mesh

    @property
    def kappa1(self):
        return self.state.kappa1

    @property
    def events(self):
        return self.state.events

    @property
    def records(self):
        return self.state.records


def start_state(metric: PolyhedralMetric, opts: SolverOptions | None = None):
    """Delaunay-normalize the development's triangulation and pick the
    starting radius; returns the t = 1 continuation state."""
    opts = opts or SolverOptions()
    mesh = CornerMesh.from_metric(metric)
    initial_flips = weighted_delaunay(mesh, np.ones(mesh.n_vertices), debug=opts.debug)
    radius, P = choose_initial_radius(metric, mesh, opts)
    kappa1 = P.kappa.copy()
    state = ContinuationState(
        metric=metric,
        mesh=mesh,
        r=np.full(mesh.n_vertices, radius),
        t=1.0,
        kappa1=kappa1,
        r_init=radius,
        P=P,
        J=jacobian.assemble(P),
        newton_tol=opts.newton_tol * max(1.0, float(np.abs(kappa1).max())),
        flips=initial_flips,
    )
    u, sigma, vt = np.linalg.svd(state.J)
    state.last_cond = float(sigma[0] / sigma[-1])
    state.last_sigma_max = float(sigma[0])
    record = {
        "t": 1.0,
        "kappa_inf": float(np.abs(kappa1).max()),
        "flips_so_far": state.flips,
        "newton_iters": 0,
        "cond": state.last_cond if math.isfinite(state.last_cond) else None,
    }
    state.records.append(record)
    if opts.progress is not None:
        opts.progress(record)
    return state


def solve_path(metric: PolyhedralMetric, opts: SolverOptions | None = None) -> SolveResult:
    """March t from 1 down to kappa_stop; returns the final polytope.

    Raises SolverAbort (with a state dump attached) if the step size
    underflows or the step budget runs out.
    """
    opts = opts or SolverOptions()
    state = start_state(metric, opts)
    if opts.observer is not None:
        opts.observer(state)
    t_stop = opts.kappa_stop
    dt = opts.dt_init
    steps = 0
    while state.t > t_stop:
        steps += 1
        if steps > opts.max_steps:
            raise SolverAbort(
                f"step budget {opts.max_steps} exhausted at t={state.t!r}",
                state_dump=state.dump("step budget exhausted"),
            )
        dt_eff = min(dt, 0.5 * state.t)
        t_new = state.t - dt_eff
        if t_new < t_stop:
            t_new = t_stop
            dt_eff = state.t - t_stop
        result = step(state, t_new, opts)
        if result.accepted:
            if opts.observer is not None:
                opts.observer(state)
            if _at_floor(state):
                state.floor_stop = True
                break
            if result.newton_iters <= 3:
                dt *= opts.growth
        else:
            dt = 0.5 * dt_eff
            if dt < opts.dt_min:
                if _at_floor(state):
                    state.floor_stop = True
                    break
                raise SolverAbort(
                    f"step size underflow at t={state.t!r}: {result.reason}",
                    state_dump=state.dump(result.reason),
                )
    return SolveResult(polytope=state.P, state=state)


def _at_floor(state):
    """True when the state's curvature is below what double-precision
    radii can express; only reachable near flat limits, where the row
    norms of the curvature Jacobian blow up."""
    if not math.isfinite(state.last_sigma_max):
        return False
    floor = _kappa_floor(state.last_sigma_max, state.r)
    return float(np.abs(state.P.kappa).max()) <= floor
