"""Scratch: inversion-count robustness of grid conventions across master seeds."""
import numpy as np

from dipcert.experiments import derive_seed
from dipcert.losses import mse
from dipcert.network import ACTIVATIONS, TRAIN_FIXED_V, init_network
from dipcert.operators import crafted_spectrum_operator, gaussian_operator, make_instance
from dipcert.trainer import Auto
from dipcert.certificates import certify

K_LIST = [2**j for j in range(4, 13)]


def run_grid(master, op_kind, x_kind, lam, trials=50):
    act = ACTIVATIONS["sigmoid"]()
    bad_cols = 0
    worst = 0
    for i, m in enumerate([1, 2, 3, 4, 5]):
        probs = []
        for j, k in enumerate(K_LIST):
            succ = 0
            for t in range(trials):
                seed = derive_seed(master, i, j, t)
                if op_kind == "gaussian":
                    op = gaussian_operator(m, 5, derive_seed(seed, 0))
                else:
                    op = crafted_spectrum_operator(5, 1.0, 2.0, derive_seed(seed, 0), m=m)
                rng = np.random.Generator(np.random.PCG64(derive_seed(seed, 1)))
                g = rng.standard_normal(5)
                if x_kind == "unit":
                    x_true = g / np.linalg.norm(g)
                else:
                    x_true = g
                inst = make_instance(op, x_true, 0.0, derive_seed(seed, 2))
                net, p0 = init_network(10, k, 5, act, TRAIN_FIXED_V, derive_seed(seed, 3))
                cert = certify(net, p0, inst, mse(inst.y), Auto(lam))
                succ += int(cert.holds)
            probs.append(succ / trials)
        inv = sum(1 for a, b in zip(probs, probs[1:]) if b < a)
        worst = max(worst, inv)
        if inv > 1:
            bad_cols += 1
    return bad_cols, worst


for conv in [("crafted", "unit", 0.1), ("crafted", "gauss", 0.1), ("gaussian", "unit", 0.1), ("crafted", "unit", 0.25)]:
    fails = []
    for master in range(8):
        bad, worst = run_grid(master, *conv)
        fails.append((bad, worst))
    n_fail = sum(1 for b, _ in fails if b > 0)
    print(f"convention {conv}: master-seed failures {n_fail}/8  detail={fails}")
