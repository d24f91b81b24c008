"""Theorem-side quantities: discretization constants, basin radii, bound envelopes.

The checkable initialization condition is sigma_min(J_0) > 0 together with
R' < R, where

    R' = 2 nu1 psi(L_0) / (sigma_min(A) sigma_min(J_0)),
    R  = sigma_min(J_0) / (2 Lip_{B(theta_0, R)}(J)).

R appears inside its own Lipschitz radius when both layers are trained, so it
solves the exact quadratic 2 R^2 + (1 + 2D) R = sigma_J0 sqrt(k/n) / (2B);
with the linear layer fixed the Jacobian Lipschitz bound is global and R is
explicit.

When the condition holds, the loss admits the envelope Psi^{-1}(xi_t) with
xi_t = sigma_A^2 sigma_J0^2 t / (4 nu2) + Psi(L_0), the parameters converge
within 2 nu1 psi(Psi^{-1}(xi_t)) / (sigma_J0 sigma_A) of the limit, and a
noisy run is observation-accurate within 2 |eps| after
t >= 4 nu2 (Psi(psi^{-1}(|eps|)) - Psi(L_0)) / (sigma_A^2 sigma_J0^2).
"""

from dataclasses import dataclass

import numpy as np

from .linalg import conic_sigma_min
from .losses import LossModel, mse
from .network import (
    TRAIN_FIXED_V,
    DipNetwork,
    ParamVector,
    forward,
    jacobian_gram,
    sigma_extremes_J,
)
from .operators import ForwardOperator, ProblemInstance, make_instance
from .trainer import (
    LIPSCHITZ_C0,
    Auto,
    TrainConfig,
    estimate_lipschitz,
    gd_train,
)

# sigma_min(J_0) counts as positive only above this fraction of sigma_max(J_0)
SIGMA_POS_TOL = 1e-8


def nu_constants(gamma: float, lips: float) -> tuple[float, float, float]:
    """Discretization constants (nu1, nu2, eta) of the step gamma <= 1/L.

    nu1 = (1 + gL)/(1 - gL/2) in (1, 4]; nu2 = (1 + gL)^2 / eta with
    eta = gamma - L gamma^2 / 2 in [0, 1/(2L)].
    """
    if lips <= 0.0:
        raise ValueError("L must be positive")
    gl = gamma * lips
    if not (0.0 < gl <= 1.0 + 1e-12):
        raise ValueError("gamma outside (0, 1/L]")
    nu1 = (1.0 + gl) / (1.0 - gl / 2.0)
    eta = gamma - lips * gamma * gamma / 2.0
    nu2 = (1.0 + gl) ** 2 / eta
    return nu1, nu2, eta


def lip_jacobian_bound(net: DipNetwork, rho: float) -> float:
    """Jacobian Lipschitz bound on B(theta_0, rho).

    B (1 + 2(D + rho)) sqrt(n/k) with both layers trained; B D sqrt(n/k)
    (global, rho-free) with the linear layer fixed.
    """
    if rho < 0.0:
        raise ValueError("rho must be >= 0")
    b, dd = net.act.b_const, net.v_bound
    root = np.sqrt(net.n / net.k)
    if net.train_mode == TRAIN_FIXED_V:
        return b * dd * root
    return b * (1.0 + 2.0 * (dd + rho)) * root


def radius_R(sigma_j0: float, net: DipNetwork) -> float:
    """Largest R with R * 2 * Lip_{B(theta_0,R)}(J) = sigma_j0."""
    if sigma_j0 < 0.0:
        raise ValueError("sigma_j0 must be >= 0")
    b, dd = net.act.b_const, net.v_bound
    rhs = sigma_j0 * np.sqrt(net.k / net.n) / (2.0 * b)
    if net.train_mode == TRAIN_FIXED_V:
        return rhs / dd
    # positive root of 2 R^2 + (1 + 2D) R - rhs = 0
    lin = 1.0 + 2.0 * dd
    return (-lin + np.sqrt(lin * lin + 8.0 * rhs)) / 4.0


def radius_R_prime(
    loss_model: LossModel, loss0: float, sigma_a: float, sigma_j0: float, nu1: float
) -> float:
    """Trajectory confinement radius 2 nu1 psi(L_0) / (sigma_A sigma_J0)."""
    if sigma_a <= 0.0 or sigma_j0 <= 0.0:
        raise ValueError("degenerate initialization")
    return 2.0 * nu1 * loss_model.psi(loss0) / (sigma_a * sigma_j0)


@dataclass(frozen=True)
class Certificate:
    sigma_j0: float
    sigma_j0_max: float
    sigma_a: float
    norm_a: float
    loss0: float
    l_hat: float
    gamma: float
    nu1: float
    nu2: float
    eta: float
    r_basin: float  # R
    r_init: float  # R'
    holds: bool


def certify(
    net: DipNetwork,
    params0: ParamVector,
    instance: ProblemInstance,
    loss: LossModel,
    gamma_or_auto: float | Auto,
    c0: float = LIPSCHITZ_C0,
) -> Certificate:
    """Assemble the initialization certificate at theta_0.

    With Auto step size the curvature estimate sets gamma = lam / L_hat; with
    an explicit gamma and a non-MSE loss the worst-case L = 1/gamma is used
    (it maximizes nu1 and nu2, so the certificate only gets more conservative).
    An explicit gamma beyond 1/L_hat breaks the theorem's premise, so the
    certificate reports holds = False rather than erroring.
    """
    sigma_j0, sj_max = sigma_extremes_J(net, params0)
    sigma_a, norm_a = instance.op.sigma_min, instance.op.sigma_max
    y0 = instance.op.a @ forward(net, params0)
    loss0 = loss.value(y0)

    if isinstance(gamma_or_auto, Auto):
        l_hat = estimate_lipschitz(net, instance.op, loss, params0, c0=c0)
        gamma = gamma_or_auto.lam / l_hat
    else:
        gamma = float(gamma_or_auto)
        if loss.kind == "mse":
            l_hat = estimate_lipschitz(net, instance.op, loss, params0, c0=c0)
        else:
            l_hat = 1.0 / gamma

    gamma_valid = 0.0 < gamma * l_hat <= 1.0 + 1e-12
    if gamma_valid:
        nu1, nu2, eta = nu_constants(gamma, l_hat)
    else:
        nu1 = nu2 = eta = float("nan")

    r_basin = radius_R(sigma_j0, net)
    positive = sigma_j0 > SIGMA_POS_TOL * sj_max
    if gamma_valid and positive and sigma_a > 0.0:
        r_init = radius_R_prime(loss, loss0, sigma_a, sigma_j0, nu1)
    else:
        r_init = np.inf
    return Certificate(
        sigma_j0=sigma_j0,
        sigma_j0_max=sj_max,
        sigma_a=sigma_a,
        norm_a=norm_a,
        loss0=loss0,
        l_hat=l_hat,
        gamma=gamma,
        nu1=nu1,
        nu2=nu2,
        eta=eta,
        r_basin=r_basin,
        r_init=r_init,
        holds=bool(gamma_valid and positive and r_init < r_basin),
    )


@dataclass(frozen=True)
class BoundSeries:
    """Envelope values at steps 0..len-1; x_bound only with recovery inputs."""

    xi: np.ndarray
    loss_bound: np.ndarray
    theta_bound: np.ndarray
    x_bound: np.ndarray | None
    lambda_min_conic: float | None
    dist_sigma: float | None
    noise_norm: float | None


def bound_series(
    cert: Certificate,
    loss_model: LossModel,
    steps: int,
    recovery_inputs: tuple[float, float, float] | None = None,
) -> BoundSeries:
    """Envelope series for steps 0..steps (inclusive).

    recovery_inputs = (lambda_min_conic, dist_sigma, noise_norm) enables the
    signal-space bound
    psi(Psi^{-1}(xi))/lambda + (1 + |A|/lambda) dist + |eps|/lambda.
    """
    if not cert.holds:
        raise ValueError("certificate required: bounds are vacuous when it fails")
    env = loss_model.envelope()
    tau = np.arange(steps + 1, dtype=float)
    rate = cert.sigma_a**2 * cert.sigma_j0**2 / (4.0 * cert.nu2)
    xi = rate * tau + env.Psi(cert.loss0)
    loss_bound = env.Psi_inv(xi)
    psi_of = np.array([loss_model.psi(lb) for lb in loss_bound])
    theta_bound = 2.0 * cert.nu1 * psi_of / (cert.sigma_j0 * cert.sigma_a)
    x_bound = None
    lam = dist = eps = None
    if recovery_inputs is not None:
        lam, dist, eps = recovery_inputs
        if lam <= 0.0:
            raise ValueError("restricted injectivity constant must be positive")
        x_bound = psi_of / lam + (1.0 + cert.norm_a / lam) * dist + eps / lam
    return BoundSeries(
        xi=xi,
        loss_bound=loss_bound,
        theta_bound=theta_bound,
        x_bound=x_bound,
        lambda_min_conic=lam,
        dist_sigma=dist,
        noise_norm=eps,
    )


def early_stop_tau(cert: Certificate, loss_model: LossModel, noise_norm: float) -> float:
    """Smallest real t with xi_t >= Psi(psi^{-1}(|eps|)); callers round up.

    From there on the observation-space error is bounded by 2 |eps|.
    """
    if noise_norm <= 0.0:
        raise ValueError("noiseless: no early stop needed")
    if not cert.holds:
        raise ValueError("certificate required")
    env = loss_model.envelope()
    target = env.Psi(loss_model.psi_inv(noise_norm))
    rate = cert.sigma_a**2 * cert.sigma_j0**2 / (4.0 * cert.nu2)
    return max(float((target - env.Psi(cert.loss0)) / rate), 0.0)


def recovery_estimates(
    net: DipNetwork,
    params_final: ParamVector,
    instance: ProblemInstance,
    fit_steps: int,
    c0: float = LIPSCHITZ_C0,
) -> tuple[float, float]:
    """(lambda_min_conic, dist_sigma) surrogates for the signal-space bound.

    dist_sigma is the residual of fitting the network directly to x_true
    (identity operator) for fit_steps iterations, an upper estimate of the
    distance from x_true to the reachable set; the tangent cone at the fit is
    approximated by range(J), whose basis comes from the Gram eigenvectors.
    """
    n = net.n
    eye_op = ForwardOperator(a=np.eye(n), sigma_min=1.0, sigma_max=1.0, label="identity")
    inst_id = make_instance(eye_op, instance.x_true, 0.0, 0)
    cfg = TrainConfig(gamma=Auto(0.5), max_steps=fit_steps, loss_stop=1e-28, lipschitz_c0=c0)
    fit = gd_train(net, params_final, inst_id, mse(instance.x_true), cfg)
    if fit.diverged:
        raise RuntimeError(
            f"auxiliary fit diverged (last residual {float(fit.loss[-1]):.3e})"
        )
    dist_sigma = float(np.linalg.norm(fit.x_final - instance.x_true))
    gram = jacobian_gram(net, fit.theta_final)
    evals, evecs = np.linalg.eigh(gram)
    tol = 1e-10 * max(evals[-1], 0.0)
    basis = evecs[:, evals > tol]
    lam = conic_sigma_min(instance.op.a, basis)
    return lam, dist_sigma


@dataclass(frozen=True)
class OverparamBound:
    k_min: float
    init_error_bound: float
    lambda0: float


def overparam_bound(
    loss_model: LossModel,
    op: ForwardOperator,
    instance: ProblemInstance,
    d: int,
    big_c: float = 1.0,
    big_c_prime: float = 1.0,
) -> OverparamBound:
    """Width bound k_min = C' sigma_A^-4 n psi(Lambda0/2 * E^2)^4 with
    E = C |A| sqrt(n ln d) + sqrt(m)(|A x_true|_inf + |eps|_inf).

    The absolute constants C, C' are unknown; defaults of 1 make k_min a
    trend indicator, not a truth.  Lambda0 is the largest gradient-to-offset
    ratio |grad L(v)| / |v - y| over a sampled ball (exactly 2 for the
    squared-error objective).
    """
    if d < 2:
        raise ValueError("d must be >= 2 (log d degenerate)")
    if big_c <= 0.0 or big_c_prime <= 0.0:
        raise ValueError("constants must be positive")
    m, n = op.m, op.n
    e_init = big_c * op.sigma_max * np.sqrt(n * np.log(d)) + np.sqrt(m) * (
        float(np.max(np.abs(instance.y_bar))) + float(np.max(np.abs(instance.noise)))
    )
    lambda0 = _max_gradient_ratio(loss_model, e_init)
    k_min = (
        big_c_prime
        * op.sigma_min**-4
        * n
        * loss_model.psi(lambda0 / 2.0 * e_init**2) ** 4
    )
    return OverparamBound(k_min=float(k_min), init_error_bound=float(e_init), lambda0=lambda0)


def _max_gradient_ratio(loss_model: LossModel, radius: float, samples: int = 128) -> float:
    """sup over a sampled ball around y of |grad L(v)| / |v - y|."""
    rng = np.random.Generator(np.random.PCG64(0))
    m = loss_model.y.shape[0]
    best = 0.0
    radii = np.geomspace(max(radius, 1e-6) * 1e-4, max(radius, 1e-6), samples)
    for r in radii:
        g = rng.standard_normal(m)
        v = loss_model.y + r * g / np.linalg.norm(g)
        offset = float(np.linalg.norm(v - loss_model.y))
        if offset == 0.0:
            continue
        best = max(best, float(np.linalg.norm(loss_model.grad(v))) / offset)
    return best


def certificate_report_lines(cert: Certificate) -> list[str]:
    """Flat key = value lines for the report file."""
    fields = [
        ("sigma_j0", cert.sigma_j0),
        ("sigma_j0_max", cert.sigma_j0_max),
        ("sigma_a", cert.sigma_a),
        ("norm_a", cert.norm_a),
        ("loss0", cert.loss0),
        ("l_hat", cert.l_hat),
        ("gamma", cert.gamma),
        ("nu1", cert.nu1),
        ("nu2", cert.nu2),
        ("eta", cert.eta),
        ("r_basin", cert.r_basin),
        ("r_init", cert.r_init),
    ]
    lines = [f"{name} = {float(val)!r}" for name, val in fields]
    lines.append(f"holds = {'true' if cert.holds else 'false'}")
    return lines


def read_certificate_report(path) -> Certificate:
    """Parse a report file back into a Certificate."""
    vals = {}
    with open(path, "r") as fh:
        for line in fh:
            body = line.split("#", 1)[0].strip()
            if not body:
                continue
            key, _, raw = body.partition("=")
            vals[key.strip()] = raw.strip()
    holds = vals.pop("holds") == "true"
    return Certificate(
        sigma_j0=float(vals["sigma_j0"]),
        sigma_j0_max=float(vals["sigma_j0_max"]),
        sigma_a=float(vals["sigma_a"]),
        norm_a=float(vals["norm_a"]),
        loss0=float(vals["loss0"]),
        l_hat=float(vals["l_hat"]),
        gamma=float(vals["gamma"]),
        nu1=float(vals["nu1"]),
        nu2=float(vals["nu2"]),
        eta=float(vals["eta"]),
        r_basin=float(vals["r_basin"]),
        r_init=float(vals["r_init"]),
        holds=holds,
    )


def bound_series_to_csv(series: BoundSeries, path) -> None:
    """Write the envelope series; header step,xi,loss_bound,theta_bound,x_bound."""
    lines = ["step,xi,loss_bound,theta_bound,x_bound"]
    for t in range(len(series.xi)):
        xb = float(series.x_bound[t]) if series.x_bound is not None else float("nan")
        lines.append(
            f"{t},{float(series.xi[t])!r},{float(series.loss_bound[t])!r},"
            f"{float(series.theta_bound[t])!r},{xb!r}"
        )
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
