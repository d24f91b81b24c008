"""Scratch: Fig-1a-style grid trend + envelope harness timing."""
import time

import numpy as np

from dipcert.experiments import grid_certificate, derive_seed
from dipcert.losses import mse
from dipcert.network import ACTIVATIONS, TRAIN_FIXED_V, init_network
from dipcert.operators import crafted_spectrum_operator, make_instance
from dipcert.trainer import Auto, TrainConfig, gd_train
from dipcert.certificates import certify, bound_series

K_LIST = [2**j for j in range(4, 13)]

t0 = time.time()
for op_kind in ("gaussian", "crafted"):
    grid = grid_certificate(
        m_list=[1, 2, 3, 4, 5], k_list=K_LIST, n=5, d=10, trials=50,
        master_seed=7, op_kind=op_kind, auto_lam=0.1,
    )
    print(f"op_kind={op_kind}  ({time.time()-t0:.1f}s)")
    for i, m in enumerate(grid.axis1):
        probs = [grid.cells[i][j].probability for j in range(len(K_LIST))]
        inv = sum(1 for a, b in zip(probs, probs[1:]) if b < a)
        print(f"  m={m}: " + " ".join(f"{p:.2f}" for p in probs) + f"   inversions={inv}")

# envelope harness candidate: m=3 n=5 k=16384 fixedv crafted, xs unit, lam=0.1
print("\nenvelope harness probe")
t0 = time.time()
held = 0
env_bad = 0
for t in range(30):
    seed = derive_seed(1000, t)
    op = crafted_spectrum_operator(5, 1.0, 2.0, derive_seed(seed, 0), m=3)
    rng = np.random.Generator(np.random.PCG64(derive_seed(seed, 1)))
    g = rng.standard_normal(5)
    x_true = g / np.linalg.norm(g)
    inst = make_instance(op, x_true, 0.0, derive_seed(seed, 2))
    net, p0 = init_network(10, 16384, 5, ACTIVATIONS["sigmoid"](), TRAIN_FIXED_V, derive_seed(seed, 3))
    loss = mse(inst.y)
    cert = certify(net, p0, inst, loss, Auto(0.1))
    if not cert.holds:
        continue
    held += 1
    cfg = TrainConfig(gamma=Auto(0.1), max_steps=4000, loss_stop=1e-15)
    traj = gd_train(net, p0, inst, loss, cfg)
    cfg2 = TrainConfig(gamma=Auto(0.1), max_steps=traj.steps_run, loss_stop=0.0, theta_ref=traj.theta_final)
    traj2 = gd_train(net, p0, inst, loss, cfg2)
    bs = bound_series(cert, loss, traj.steps_run)
    ok_loss = bool(np.all(traj.loss <= bs.loss_bound * (1 + 1e-9)))
    ok_theta = bool(np.all(traj2.theta_ref_dist <= bs.theta_bound[: len(traj2.theta_ref_dist)] * (1 + 1e-9)))
    if not (ok_loss and ok_theta):
        env_bad += 1
        print(f"  seed {t}: loss_ok={ok_loss} theta_ok={ok_theta} steps={traj.steps_run} final={traj.loss[-1]:.2e}")
print(f"held={held}/30 env violations={env_bad}  ({time.time()-t0:.1f}s)")
