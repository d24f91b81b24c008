"""Scratch: blur scenario tuning for the ratio-inversion check."""
import time

import numpy as np

from dipcert import pgm
from dipcert.experiments import deblur_pipeline
from dipcert.operators import gaussian_blur_operator, make_instance
from dipcert.trainer import Auto


def make_test_image(side=16):
    yy, xx = np.meshgrid(np.arange(side), np.arange(side), indexing="ij")
    cx = cy = (side - 1) / 2.0
    blob = 200.0 * np.exp(-((xx - cx) ** 2 + (yy - cy) ** 2) / (2 * (side / 4.0) ** 2))
    ramp = 40.0 * xx / side
    return np.clip(blob + ramp + 10.0, 0, 255)


img = make_test_image(16)
pgm.write_pgm("/tmp/test16.pgm", img)
x_true = img.ravel()

op = gaussian_blur_operator(16, 1.0)
out = {}
for tag, ns in (("noiseless", 0.0), ("noisy", 2.5)):
    t0 = time.time()
    rep = deblur_pipeline("/tmp/test16.pgm", 1.0, ns, 2048, 16, 16000, Auto(1.0), 5,
                          f"/tmp/deblur_b2_{tag}", op_kind="blur", lipschitz_c0=0.5)
    inst = make_instance(op, x_true, ns, 1)  # just for noise norm bookkeeping
    y_res = np.sqrt(rep.trajectory.loss[-1])
    x_err = rep.signal_errors[-1]
    y_bar = op.a @ x_true
    ybar_res = np.linalg.norm(rep.trajectory.y_final - y_bar)
    errs = rep.signal_errors
    imin = int(np.argmin(errs))
    out[tag] = (x_err, y_res)
    print(f"(b) {tag}: x_err={x_err:.2f} y_res={y_res:.4f} ybar_res={ybar_res:.2f} "
          f"x/y={x_err/y_res:.1f} argmin={imin} div={rep.trajectory.diverged} ({time.time()-t0:.1f}s)")

r_nl = out["noiseless"][0] / out["noiseless"][1]
r_no = out["noisy"][0] / out["noisy"][1]
print(f"ratio_nl={r_nl:.1f} ratio_noisy={r_no:.1f} separation={r_nl/r_no:.1f}x "
      f"x_degradation={out['noisy'][0]/out['noiseless'][0]:.2f}x")
