"""Fixed-step gradient descent on theta -> L(A g(u, theta)) with instrumentation.

The update is theta_{t+1} = theta_t - gamma * grad, with the gradient
assembled as J^T A^T grad_y L(y_t) without materializing J.  Every run
records per-step loss, gradient norm, and distance from the initial
parameters; the smallest Jacobian singular value can be recorded every s
steps (the Gram eigensolve is the cost hotspot, so it is opt-in).

Step sizes are either explicit or Auto(lambda), meaning gamma = lambda / L
with L the closed-form curvature estimate from ``estimate_lipschitz``.
"""

from dataclasses import dataclass, field

import numpy as np

from .losses import LossModel
from .network import (
    TRAIN_FIXED_V,
    DipNetwork,
    ParamVector,
    forward,
    sigma_min_J,
)
from .operators import ForwardOperator, ProblemInstance

# Multiplier on the curvature-estimate formula.  Calibrated so that observed
# per-step curvature ratios along desk-scale trajectories stay below the
# estimate with margin (see tests); override via TrainConfig / CLI for other
# regimes.
LIPSCHITZ_C0 = 64.0

# A run is declared diverged when the loss stops being finite or exceeds
# this multiple of the initial loss.
DIVERGENCE_FACTOR = 1e6


@dataclass(frozen=True)
class Auto:
    """Step size gamma = lam / L_hat with lam in (0, 1]."""

    lam: float = 0.5

    def __post_init__(self):
        if not (0.0 < self.lam <= 1.0):
            raise ValueError("auto step fraction must lie in (0, 1]")


@dataclass(frozen=True)
class TrainConfig:
    gamma: float | Auto = Auto(0.5)
    max_steps: int = 2000
    loss_stop: float = 1e-14
    record_sigma_every: int = 0  # 0 = never
    record_theta_norm: bool = True
    lipschitz_c0: float = LIPSCHITZ_C0
    signal_target: np.ndarray | None = None  # record |x_t - target| when given
    snapshot_steps: tuple = ()  # steps at which to keep a copy of x_t
    theta_ref: "ParamVector | None" = None  # record |theta_t - theta_ref| when given

    def __post_init__(self):
        if isinstance(self.gamma, float) and self.gamma < 0.0:
            raise ValueError("gamma must be >= 0")
        if self.max_steps < 1:
            raise ValueError("max_steps must be >= 1")


@dataclass
class TrainTrajectory:
    """Per-step records (index = iteration) plus final state.

    ``loss``, ``grad_norm``, ``theta_dist`` and ``sigma_min_j`` all have
    length steps_run + 1; unrecorded sigma entries are nan.
    """

    loss: np.ndarray
    grad_norm: np.ndarray
    theta_dist: np.ndarray
    sigma_min_j: np.ndarray
    steps_run: int
    gamma_used: float
    l_hat: float | None
    diverged: bool
    theta_final: ParamVector
    x_final: np.ndarray
    y_final: np.ndarray
    signal_error: np.ndarray | None = None
    theta_ref_dist: np.ndarray | None = None
    snapshots: dict = field(default_factory=dict)


def estimate_lipschitz(
    net: DipNetwork,
    op: ForwardOperator,
    loss: LossModel,
    params0: ParamVector,
    c0: float = LIPSCHITZ_C0,
) -> float:
    """Closed-form curvature estimate |A|^2 n/k + |A| |y - y0| lip_J sqrt(n/k).

    ``lip_J`` is the mode's Jacobian-Lipschitz coefficient: B(1+2D) with both
    layers trained, B D with the linear layer fixed.  The estimate is specific
    to the squared-error objective; other losses need an explicit gamma.
    """
    if loss.kind != "mse":
        raise ValueError("no closed-form estimate; supply gamma explicitly")
    y0 = op.a @ forward(net, params0)
    dy = float(np.linalg.norm(loss.y - y0))
    b, dd = net.act.b_const, net.v_bound
    lip_coeff = b * dd if net.train_mode == TRAIN_FIXED_V else b * (1.0 + 2.0 * dd)
    ratio = net.n / net.k
    return c0 * (op.sigma_max**2 * ratio + op.sigma_max * dy * lip_coeff * np.sqrt(ratio))


def resolve_gamma(
    cfg: TrainConfig,
    net: DipNetwork,
    op: ForwardOperator,
    loss: LossModel,
    params0: ParamVector,
) -> tuple[float, float | None]:
    """(gamma, L_hat); L_hat is None when gamma was given explicitly."""
    if isinstance(cfg.gamma, Auto):
        l_hat = estimate_lipschitz(net, op, loss, params0, c0=cfg.lipschitz_c0)
        return cfg.gamma.lam / l_hat, l_hat
    return float(cfg.gamma), None


def gd_train(
    net: DipNetwork,
    params0: ParamVector,
    instance: ProblemInstance,
    loss: LossModel,
    cfg: TrainConfig,
) -> TrainTrajectory:
    """Run gradient descent from params0 until loss_stop, divergence, or budget.

    Deterministic: fixed-step full-batch descent from a fixed start point.
    Divergence is reported as data (flag on the trajectory), not an exception.
    """
    a = instance.op.a
    act = net.act
    u = net.u
    sqrt_k = np.sqrt(net.k)
    fixed_v = net.train_mode == TRAIN_FIXED_V

    gamma, l_hat = resolve_gamma(cfg, net, instance.op, loss, params0)

    w = params0.w.copy()
    v = params0.v.copy()
    w0, v0 = params0.w, params0.v

    losses, grads, dists, sigmas = [], [], [], []
    signal_err = [] if cfg.signal_target is not None else None
    ref_dist = [] if cfg.theta_ref is not None else None
    snapshots = {}
    diverged = False
    loss0 = None

    step = 0
    while True:
        z = w @ u
        h = act.fn(z)
        x = (v @ h) / sqrt_k
        y = a @ x
        cur = loss.value(y)

        if loss0 is None:
            loss0 = cur
        if not np.isfinite(cur) or cur > DIVERGENCE_FACTOR * max(loss0, 1e-300):
            diverged = True
            break

        # grad = J^T A^T grad_y L(y), assembled blockwise
        seed = a.T @ loss.grad(y)
        back = v.T @ seed
        gw = ((act.deriv(z) * back) / sqrt_k)[:, None] * u[None, :]
        gnorm_sq = float(np.sum(gw * gw))
        if not fixed_v:
            gv = (seed[:, None] * h[None, :]) / sqrt_k
            gnorm_sq += float(np.sum(gv * gv))

        losses.append(cur)
        grads.append(np.sqrt(gnorm_sq))
        if cfg.record_theta_norm:
            dw = w - w0
            dist_sq = float(np.sum(dw * dw))
            if not fixed_v:
                dv = v - v0
                dist_sq += float(np.sum(dv * dv))
            dists.append(np.sqrt(dist_sq))
        else:
            dists.append(np.nan)
        if cfg.record_sigma_every > 0 and step % cfg.record_sigma_every == 0:
            sigmas.append(sigma_min_J(net, ParamVector(w, v, net.train_mode)))
        else:
            sigmas.append(np.nan)
        if signal_err is not None:
            signal_err.append(float(np.linalg.norm(x - cfg.signal_target)))
        if ref_dist is not None:
            ref_dist.append(ParamVector(w, v, net.train_mode).dist(cfg.theta_ref))
        if step in cfg.snapshot_steps:
            snapshots[step] = x.copy()

        if cur <= cfg.loss_stop or step >= cfg.max_steps:
            break

        w -= gamma * gw
        if not fixed_v:
            v -= gamma * gv
        step += 1

    theta_final = ParamVector(w, v, net.train_mode)
    x_final = forward(net, theta_final)
    return TrainTrajectory(
        loss=np.array(losses),
        grad_norm=np.array(grads),
        theta_dist=np.array(dists),
        sigma_min_j=np.array(sigmas),
        steps_run=len(losses) - 1 if losses else 0,
        gamma_used=gamma,
        l_hat=l_hat,
        diverged=diverged,
        theta_final=theta_final,
        x_final=x_final,
        y_final=a @ x_final,
        signal_error=np.array(signal_err) if signal_err is not None else None,
        theta_ref_dist=np.array(ref_dist) if ref_dist is not None else None,
        snapshots=snapshots,
    )


def descent_residuals(traj: TrainTrajectory, l_hat: float, gamma: float) -> np.ndarray:
    """Per-step slack L_{t+1} - L_t + eta |grad_t|^2 with eta = gamma - L gamma^2 / 2.

    Nonpositive entries certify the descent inequality empirically.
    """
    eta = gamma - l_hat * gamma * gamma / 2.0
    return np.diff(traj.loss) + eta * traj.grad_norm[:-1] ** 2


def trajectory_to_csv(traj: TrainTrajectory, path) -> None:
    """Write per-step records; header step,loss,grad_norm,theta_dist,sigma_min_j."""
    lines = ["step,loss,grad_norm,theta_dist,sigma_min_j"]
    for t in range(len(traj.loss)):
        lines.append(
            f"{t},{float(traj.loss[t])!r},{float(traj.grad_norm[t])!r},"
            f"{float(traj.theta_dist[t])!r},{float(traj.sigma_min_j[t])!r}"
        )
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_trajectory_csv(path) -> dict:
    """Read a trajectory CSV back into column arrays keyed by header name."""
    with open(path, "r") as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    header = lines[0].split(",")
    cols = {name: [] for name in header}
    for ln in lines[1:]:
        for name, tok in zip(header, ln.split(",")):
            cols[name].append(float(tok))
    return {name: np.array(vals) for name, vals in cols.items()}
