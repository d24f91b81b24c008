"""Scratch: both-layers gamma grid + deblur with image-regime c0."""
import time

import numpy as np

from dipcert import pgm
from dipcert.experiments import (
    deblur_pipeline,
    divergence_thresholds,
    grid_convergence,
    spearman_rho,
)
from dipcert.trainer import Auto

t0 = time.time()
gammas = list(np.geomspace(1e-3, 1.0, 8))
grid = grid_convergence(
    n_list=[5, 10, 20, 40], gamma_list=gammas, m_ratio=0.6, k=4096, d=10,
    trials=5, steps=3000, loss_stop=1e-14, master_seed=11, train_mode="both",
)
print(f"gamma grid both-layers ({time.time()-t0:.1f}s)")
for i, n in enumerate(grid.axis1):
    row = grid.cells[i]
    print(f"  n={n}: succ " + " ".join(f"{c.probability:.1f}" for c in row)
          + " | div " + " ".join(f"{c.diverged}" for c in row))
thr = divergence_thresholds(grid)
print("  thresholds:", [f"{t:.4g}" for t in thr], " spearman:", spearman_rho(grid.axis1, thr))


def make_test_image(side=16):
    yy, xx = np.meshgrid(np.arange(side), np.arange(side), indexing="ij")
    cx = cy = (side - 1) / 2.0
    blob = 200.0 * np.exp(-((xx - cx) ** 2 + (yy - cy) ** 2) / (2 * (side / 4.0) ** 2))
    ramp = 40.0 * xx / side
    return np.clip(blob + ramp + 10.0, 0, 255)


img = make_test_image(16)
pgm.write_pgm("/tmp/test16.pgm", img)
x_true = img.ravel() / 255.0
xn = np.linalg.norm(x_true)

t0 = time.time()
rep_a = deblur_pipeline("/tmp/test16.pgm", 1.0, 0.0, 2048, 16, 4000, Auto(0.5), 5,
                        "/tmp/deblur_a", op_kind="crafted", lipschitz_c0=8.0)
print(f"(a) crafted noiseless: rel={rep_a.signal_errors[-1]/xn:.2e} loss={rep_a.trajectory.loss[-1]:.2e} "
      f"steps={rep_a.trajectory.steps_run} div={rep_a.trajectory.diverged} ({time.time()-t0:.1f}s)")

for tag, ns, steps in (("noiseless", 0.0, 12000), ("noisy2.5", 2.5, 12000)):
    t0 = time.time()
    rep = deblur_pipeline("/tmp/test16.pgm", 1.0, ns, 2048, 16, steps, Auto(0.5), 5,
                          f"/tmp/deblur_b_{tag}", op_kind="blur", lipschitz_c0=8.0)
    y_res = np.sqrt(rep.trajectory.loss[-1])
    x_err = rep.signal_errors[-1]
    print(f"(b) blur {tag}: x_err={x_err:.4f} y_res={y_res:.3e} ratio={x_err/y_res:.3e} "
          f"div={rep.trajectory.diverged} ({time.time()-t0:.1f}s)")

t0 = time.time()
rep_c = deblur_pipeline("/tmp/test16.pgm", 1.0, 50.0, 2048, 16, 8000, Auto(0.5), 5,
                        "/tmp/deblur_c", op_kind="crafted", lipschitz_c0=8.0)
errs = rep_c.signal_errors
imin = int(np.argmin(errs))
print(f"(c) crafted noisy50: argmin={imin}/{len(errs)-1} err_min={errs[imin]:.3f} "
      f"err_final={errs[-1]:.3f} err0={errs[0]:.3f} div={rep_c.trajectory.diverged} ({time.time()-t0:.1f}s)")
