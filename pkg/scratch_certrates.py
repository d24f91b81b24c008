"""Scratch: certification rates + envelope check for candidate harness settings."""
import numpy as np

from dipcert.losses import mse
from dipcert.network import ACTIVATIONS, TRAIN_BOTH, TRAIN_FIXED_V, init_network
from dipcert.operators import gaussian_operator, crafted_spectrum_operator, make_instance
from dipcert.trainer import Auto, TrainConfig, gd_train, descent_residuals
from dipcert.certificates import certify, bound_series, early_stop_tau
from dipcert.experiments import derive_seed


def rate(label, act_name, mode, m, n, d, k, x_scale, noise_std, lam, trials=20, op_kind="crafted", master=0, envelope_check=False):
    act = ACTIVATIONS[act_name]()
    n_hold = 0
    env_ok = 0
    es_ok = 0
    for t in range(trials):
        seed = derive_seed(master, t)
        if op_kind == "crafted":
            op = crafted_spectrum_operator(n, 1.0, 2.0, derive_seed(seed, 0), m=m)
        else:
            op = gaussian_operator(m, n, derive_seed(seed, 0))
        rng = np.random.Generator(np.random.PCG64(derive_seed(seed, 1)))
        x_true = x_scale * rng.standard_normal(n)
        inst = make_instance(op, x_true, noise_std, derive_seed(seed, 2))
        net, p0 = init_network(d, k, n, act, mode, derive_seed(seed, 3))
        loss = mse(inst.y)
        cert = certify(net, p0, inst, loss, Auto(lam))
        if cert.holds:
            n_hold += 1
            if envelope_check:
                cfg = TrainConfig(gamma=Auto(lam), max_steps=3000, loss_stop=1e-15)
                traj = gd_train(net, p0, inst, loss, cfg)
                bs = bound_series(cert, loss, traj.steps_run)
                ok_loss = np.all(traj.loss <= bs.loss_bound * (1 + 1e-9))
                dists = np.array([
                    np.sqrt(np.sum((traj.theta_final.w - traj.theta_final.w) ** 2))
                ])
                # theta distance to final along trajectory needs per-step params; approximate via recorded theta_dist? need custom; skip here
                env_ok += int(ok_loss and not traj.diverged)
                if noise_std > 0:
                    tau = early_stop_tau(cert, loss, inst.noise_norm)
                    ti = min(int(np.ceil(tau)), traj.steps_run)
                    # need y_t at tau; retrain partial
                    cfg2 = TrainConfig(gamma=Auto(lam), max_steps=ti, loss_stop=0.0)
                    t2 = gd_train(net, p0, inst, loss, cfg2)
                    es_ok += int(np.linalg.norm(t2.y_final - inst.y_bar) <= 2 * inst.noise_norm)
    extra = f" env_ok={env_ok}" if envelope_check else ""
    if noise_std > 0 and envelope_check:
        extra += f" early_ok={es_ok}"
    print(f"{label:58s} holds {n_hold}/{trials}{extra}")
    return n_hold / trials


# certify example from design: sigmoid fixedV crafted m=3 n=5 k=2^14
rate("certify-ex sigmoid fixedv crafted m3 n5 k=16384 xs=unit", "sigmoid", TRAIN_FIXED_V, 3, 5, 10, 16384, 1/np.sqrt(5), 0.0, 0.1)
rate("same lam=0.25", "sigmoid", TRAIN_FIXED_V, 3, 5, 10, 16384, 1/np.sqrt(5), 0.0, 0.25)
rate("same x_scale=1.0 (std gauss)", "sigmoid", TRAIN_FIXED_V, 3, 5, 10, 16384, 1.0, 0.0, 0.1)
rate("k=8 tiny (expect fail)", "sigmoid", TRAIN_FIXED_V, 3, 5, 10, 8, 1/np.sqrt(5), 0.0, 0.1)
# candidate criterion-5 envelope harness
rate("env harness sigmoid fixedv crafted m5 n5 k=8192 xs=0.25", "sigmoid", TRAIN_FIXED_V, 5, 5, 10, 8192, 0.25, 0.0, 0.25, envelope_check=True)
# candidate default train config
rate("default cfg sigmoid fixedv crafted m5 n5 k=4096 xs=0.2", "sigmoid", TRAIN_FIXED_V, 5, 5, 10, 4096, 0.2, 0.0, 0.25)
# criterion 9 noisy harness
rate("noisy sigmoid fixedv crafted m5 n5 k=16384 xs=.2 ns=.15", "sigmoid", TRAIN_FIXED_V, 5, 5, 10, 16384, 0.2, 0.15, 0.25, envelope_check=True)
# grid transition probe: gaussian op, m=1..3, fixedv, lam=0.1
for m in (1, 2, 3):
    for k in (256, 1024, 4096):
        rate(f"grid gaussian m={m} k={k} xs=1 lam=0.1", "sigmoid", TRAIN_FIXED_V, m, 5, 10, k, 1.0, 0.0, 0.1, trials=20)
