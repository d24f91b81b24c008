"""Scratch: gamma-grid divergence trend + deblur scenarios."""
import time

import numpy as np

from dipcert import pgm
from dipcert.experiments import (
    deblur_pipeline,
    divergence_thresholds,
    grid_convergence,
    spearman_rho,
)
from dipcert.losses import mse
from dipcert.operators import gaussian_blur_operator, make_instance
from dipcert.trainer import Auto


def make_test_image(side=16):
    yy, xx = np.meshgrid(np.arange(side), np.arange(side), indexing="ij")
    cx = cy = (side - 1) / 2.0
    blob = 200.0 * np.exp(-((xx - cx) ** 2 + (yy - cy) ** 2) / (2 * (side / 4.0) ** 2))
    ramp = 40.0 * xx / side
    return np.clip(blob + ramp + 10.0, 0, 255)


t0 = time.time()
gammas = list(np.geomspace(1e-2, 10.0, 7))
grid = grid_convergence(
    n_list=[5, 10, 20, 40], gamma_list=gammas, m_ratio=0.6, k=4096, d=10,
    trials=5, steps=3000, loss_stop=1e-14, master_seed=11,
)
print(f"gamma grid ({time.time()-t0:.1f}s)")
for i, n in enumerate(grid.axis1):
    row = grid.cells[i]
    print(f"  n={n}: succ " + " ".join(f"{c.probability:.1f}" for c in row)
          + " | div " + " ".join(f"{c.diverged}" for c in row))
thr = divergence_thresholds(grid)
print("  thresholds:", thr, " spearman:", spearman_rho(grid.axis1, thr))

img = make_test_image(16)
pgm.write_pgm("/tmp/test16.pgm", img)
x_true = img.ravel() / 255.0

t0 = time.time()
rep_a = deblur_pipeline("/tmp/test16.pgm", 1.0, 0.0, 2048, 16, 20000, Auto(0.5), 5,
                        "/tmp/deblur_a", op_kind="crafted")
rel = rep_a.signal_errors[-1] / np.linalg.norm(x_true)
print(f"(a) crafted noiseless: rel_err={rel:.2e} steps={rep_a.trajectory.steps_run} "
      f"loss={rep_a.trajectory.loss[-1]:.2e} diverged={rep_a.trajectory.diverged} ({time.time()-t0:.1f}s)")

blur_op = gaussian_blur_operator(16, 1.0)
print(f"blur op: smin={blur_op.sigma_min:.3e} smax={blur_op.sigma_max:.3e} kappa={blur_op.sigma_max/blur_op.sigma_min:.3e}")

t0 = time.time()
for tag, ns in (("noiseless", 0.0), ("noisy2.5", 2.5)):
    rep = deblur_pipeline("/tmp/test16.pgm", 1.0, ns, 2048, 16, 8000, Auto(0.5), 5,
                          f"/tmp/deblur_b_{tag}", op_kind="blur")
    inst = make_instance(blur_op, x_true, ns / 255.0, 0)
    y_res = np.linalg.norm(rep.trajectory.y_final - inst.y)  # same seeds -> same y? check noise seed path
    print(f"(b) blur {tag}: x_err={rep.signal_errors[-1]:.4f} loss_final={rep.trajectory.loss[-1]:.3e} "
          f"steps={rep.trajectory.steps_run} ({time.time()-t0:.1f}s)")

t0 = time.time()
rep_c = deblur_pipeline("/tmp/test16.pgm", 1.0, 50.0, 2048, 16, 8000, Auto(0.5), 5,
                        "/tmp/deblur_c", op_kind="crafted")
errs = rep_c.signal_errors
imin = int(np.argmin(errs))
print(f"(c) crafted noisy50: argmin={imin}/{len(errs)-1} err_min={errs[imin]:.3f} "
      f"err_final={errs[-1]:.3f} err0={errs[0]:.3f} ({time.time()-t0:.1f}s)")
