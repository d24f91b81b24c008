"""Scratch: measure observed curvature ratios vs the L-estimate formula value."""
import numpy as np

from dipcert.losses import mse
from dipcert.network import ACTIVATIONS, TRAIN_BOTH, TRAIN_FIXED_V, init_network, forward, ParamVector
from dipcert.operators import gaussian_operator, crafted_spectrum_operator, make_instance
from dipcert.trainer import estimate_lipschitz, gd_train, TrainConfig, Auto


def grad_at(net, inst, loss, w, v):
    u = net.u
    z = w @ u
    h = net.act.fn(z)
    x = (v @ h) / np.sqrt(net.k)
    y = inst.op.a @ x
    seed = inst.op.a.T @ loss.grad(y)
    back = v.T @ seed
    gw = ((net.act.deriv(z) * back) / np.sqrt(net.k))[:, None] * u[None, :]
    parts = [gw.ravel()]
    if net.train_mode == TRAIN_BOTH:
        gv = (seed[:, None] * h[None, :]) / np.sqrt(net.k)
        parts.append(gv.ravel())
    return np.concatenate(parts)


def probe(label, act_name, mode, m, n, d, k, x_scale, noise_std, seed, steps=300, op_kind="gaussian"):
    act = ACTIVATIONS[act_name]()
    rng = np.random.Generator(np.random.PCG64(seed))
    if op_kind == "gaussian":
        op = gaussian_operator(m, n, seed + 1)
    else:
        op = crafted_spectrum_operator(n, 1.0, 2.0, seed + 1, m=m)
    x_true = x_scale * rng.standard_normal(n)
    inst = make_instance(op, x_true, noise_std, seed + 2)
    net, p0 = init_network(d, k, n, act, mode, seed + 3)
    loss = mse(inst.y)

    formula = estimate_lipschitz(net, op, loss, p0, c0=1.0)  # bare formula value
    # train with a safely small step so the trajectory is a genuine descent path
    lhat_safe = estimate_lipschitz(net, op, loss, p0, c0=512.0)
    gamma = 0.5 / lhat_safe
    w = p0.w.copy(); v = p0.v.copy()
    g_prev = grad_at(net, inst, loss, w, v)
    max_ratio = 0.0
    for t in range(steps):
        w2 = w - gamma * g_prev[: net.k * net.d].reshape(net.k, net.d)
        v2 = v.copy()
        if mode == TRAIN_BOTH:
            v2 = v - gamma * g_prev[net.k * net.d:].reshape(net.n, net.k)
        g_new = grad_at(net, inst, loss, w2, v2)
        step_norm = gamma * np.linalg.norm(g_prev)
        if step_norm > 1e-13:
            ratio = np.linalg.norm(g_new - g_prev) / step_norm
            max_ratio = max(max_ratio, ratio)
        w, v, g_prev = w2, v2, g_new
    req_c0 = max_ratio / formula
    print(f"{label:44s} formula={formula:10.4g} max_curv={max_ratio:10.4g} c0_req={req_c0:8.2f}")
    return req_c0


cases = []
for s in range(3):
    cases.append(probe(f"crit4 sigmoid both g(3x5) k=2048 xs=1 s{s}", "sigmoid", TRAIN_BOTH, 3, 5, 10, 2048, 1.0, 0.0, 100 + s))
    cases.append(probe(f"crit4 tanh both g(3x5) k=2048 xs=1 s{s}", "tanh", TRAIN_BOTH, 3, 5, 10, 2048, 1.0, 0.0, 200 + s))
    cases.append(probe(f"fixedv sigmoid crafted(5x5) k=8192 xs=.3 s{s}", "sigmoid", TRAIN_FIXED_V, 5, 5, 10, 8192, 0.3, 0.0, 300 + s, op_kind="crafted"))
    cases.append(probe(f"fixedv sigmoid crafted(5x5) k=16384 xs=.3 s{s}", "sigmoid", TRAIN_FIXED_V, 5, 5, 10, 16384, 0.3, 0.0, 400 + s, op_kind="crafted"))
    cases.append(probe(f"fixedv tanh crafted(5x5) k=16384 xs=.3 s{s}", "tanh", TRAIN_FIXED_V, 5, 5, 10, 16384, 0.3, 0.0, 500 + s, op_kind="crafted"))
    cases.append(probe(f"image-ish sigmoid both crafted(256) k=2048 s{s}", "sigmoid", TRAIN_BOTH, 256, 256, 16, 2048, 0.5, 0.0, 600 + s, op_kind="crafted", ))
    cases.append(probe(f"noisy fixedv sigmoid crafted k=8192 s{s}", "sigmoid", TRAIN_FIXED_V, 5, 5, 10, 8192, 0.3, 0.25, 700 + s, op_kind="crafted"))
    cases.append(probe(f"grid-ish sigmoid fixedv g(3x5) k=4096 s{s}", "sigmoid", TRAIN_FIXED_V, 3, 5, 10, 4096, 1.0, 0.0, 800 + s))

print(f"\nmax c0_req = {max(cases):.2f}")
