"""Seeded Monte-Carlo grids and the deblurring pipeline, at desk scale.

Every trial's seed is derived from (master_seed, axis indices, trial index)
through a splitmix64 chain, so cells are pure functions of their coordinates
and the execution order (or worker count) never affects results.  Cells run
on a thread pool when workers > 1; results are gathered by index.
"""

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import pgm
from .certificates import (
    BoundSeries,
    Certificate,
    bound_series,
    bound_series_to_csv,
    certify,
    early_stop_tau,
)
from .losses import mse
from .network import ACTIVATIONS, TRAIN_FIXED_V, init_network
from .operators import (
    ProblemInstance,
    crafted_spectrum_operator,
    gaussian_blur_operator,
    gaussian_operator,
    make_instance,
)
from .trainer import Auto, TrainConfig, TrainTrajectory, gd_train, trajectory_to_csv

_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def _splitmix64(x: int) -> int:
    x = (x + _GOLDEN) & _MASK
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


def derive_seed(master_seed: int, *indices: int) -> int:
    """64-bit seed for a (cell, trial) coordinate, independent of run order."""
    state = master_seed & _MASK
    for part in indices:
        state = _splitmix64(state ^ (((part + 1) * _GOLDEN) & _MASK))
    return state


@dataclass
class GridCell:
    trials: int
    successes: int
    diverged: int = 0
    budget_exhausted: int = 0

    @property
    def probability(self) -> float:
        return self.successes / self.trials


@dataclass
class GridResult:
    axis1: list
    axis2: list
    cells: list  # cells[i][j] for (axis1[i], axis2[j])
    axis1_name: str = "axis1"
    axis2_name: str = "axis2"


def _run_cells(tasks, workers: int):
    """Evaluate thunks, optionally on a thread pool; ordering preserved."""
    if workers <= 1:
        return [task() for task in tasks]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(task) for task in tasks]
        return [f.result() for f in futures]


def grid_certificate(
    m_list,
    k_list,
    n: int,
    d: int,
    trials: int,
    master_seed: int,
    op_kind: str = "gaussian",
    activation: str = "sigmoid",
    train_mode: str = TRAIN_FIXED_V,
    auto_lam: float = 0.1,
    spec_lo: float = 1.0,
    spec_hi: float = 2.0,
    x_unit: bool = True,
    workers: int = 1,
) -> GridResult:
    """Empirical probability that the initialization certificate holds per (m, k).

    Per trial: draw the operator, a Gaussian target, and a fresh init, then
    check the certificate.  Defaults follow the setting where the hidden
    layer alone is trained and the step fraction is small, which places the
    certification transition inside desk-scale widths; x_unit normalizes the
    target per trial, sharpening the transition so the k-trend is legible at
    50 trials per cell.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    act = ACTIVATIONS[activation]()

    def cell_task(i, j, m, k):
        def run():
            successes = 0
            for t in range(trials):
                seed = derive_seed(master_seed, i, j, t)
                if op_kind == "gaussian":
                    op = gaussian_operator(m, n, derive_seed(seed, 0))
                elif op_kind == "crafted":
                    op = crafted_spectrum_operator(n, spec_lo, spec_hi, derive_seed(seed, 0), m=m)
                else:
                    raise ValueError(f"unknown operator kind {op_kind!r}")
                rng = np.random.Generator(np.random.PCG64(derive_seed(seed, 1)))
                x_true = rng.standard_normal(n)
                if x_unit:
                    x_true = x_true / np.linalg.norm(x_true)
                inst = make_instance(op, x_true, 0.0, derive_seed(seed, 2))
                net, p0 = init_network(d, k, n, act, train_mode, derive_seed(seed, 3))
                cert = certify(net, p0, inst, mse(inst.y), Auto(auto_lam))
                successes += int(cert.holds)
            return GridCell(trials=trials, successes=successes)

        return run

    tasks = [
        cell_task(i, j, m, k) for i, m in enumerate(m_list) for j, k in enumerate(k_list)
    ]
    flat = _run_cells(tasks, workers)
    cells = [
        [flat[i * len(k_list) + j] for j in range(len(k_list))] for i in range(len(m_list))
    ]
    return GridResult(list(m_list), list(k_list), cells, "m", "k")


def grid_convergence(
    n_list,
    gamma_list,
    m_ratio: float,
    k: int,
    d: int,
    trials: int,
    steps: int,
    loss_stop: float,
    master_seed: int,
    activation: str = "sigmoid",
    train_mode: str = TRAIN_FIXED_V,
    workers: int = 1,
) -> GridResult:
    """Probability of reaching loss <= loss_stop per (n, gamma), explicit steps.

    A cell counts a run as diverged or budget-exhausted separately from
    success; m defaults to ceil(m_ratio * n).
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    act = ACTIVATIONS[activation]()

    def cell_task(i, j, n, gamma):
        def run():
            m = max(1, int(np.ceil(m_ratio * n)))
            successes = diverged = exhausted = 0
            for t in range(trials):
                seed = derive_seed(master_seed, i, j, t)
                op = gaussian_operator(m, n, derive_seed(seed, 0))
                rng = np.random.Generator(np.random.PCG64(derive_seed(seed, 1)))
                x_true = rng.standard_normal(n)
                inst = make_instance(op, x_true, 0.0, derive_seed(seed, 2))
                net, p0 = init_network(d, k, n, act, train_mode, derive_seed(seed, 3))
                cfg = TrainConfig(gamma=gamma, max_steps=steps, loss_stop=loss_stop)
                traj = gd_train(net, p0, inst, mse(inst.y), cfg)
                if traj.diverged:
                    diverged += 1
                elif traj.loss[-1] <= loss_stop:
                    successes += 1
                else:
                    exhausted += 1
            return GridCell(trials, successes, diverged, exhausted)

        return run

    tasks = [
        cell_task(i, j, n, g) for i, n in enumerate(n_list) for j, g in enumerate(gamma_list)
    ]
    flat = _run_cells(tasks, workers)
    cells = [
        [flat[i * len(gamma_list) + j] for j in range(len(gamma_list))]
        for i in range(len(n_list))
    ]
    return GridResult(list(n_list), list(gamma_list), cells, "n", "gamma")


def divergence_thresholds(grid: GridResult, frac: float = 0.5) -> list[float]:
    """Per axis1 value, the smallest gamma whose cell diverges at rate >= frac.

    Returns inf where no listed gamma diverges; gamma_list must be ascending.
    """
    out = []
    for row in grid.cells:
        thr = np.inf
        for gamma, cell in zip(grid.axis2, row):
            if cell.diverged / cell.trials >= frac:
                thr = gamma
                break
        out.append(thr)
    return out


def spearman_rho(xs, ys) -> float:
    """Spearman rank correlation (average ranks for ties)."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)

    def ranks(v):
        order = np.argsort(v, kind="stable")
        r = np.empty(len(v))
        r[order] = np.arange(1, len(v) + 1, dtype=float)
        for val in np.unique(v):
            mask = v == val
            if mask.sum() > 1:
                r[mask] = r[mask].mean()
        return r

    rx, ry = ranks(xs), ranks(ys)
    rx -= rx.mean()
    ry -= ry.mean()
    denom = np.sqrt((rx @ rx) * (ry @ ry))
    if denom == 0.0:
        return 0.0
    return float((rx @ ry) / denom)


def grid_to_csv(grid: GridResult, path, with_meta: bool = False) -> None:
    """Write cells as axis1,axis2,trials,successes,probability rows.

    with_meta appends diverged and budget_exhausted columns (step-size grid).
    """
    header = "axis1,axis2,trials,successes,probability"
    if with_meta:
        header += ",diverged,budget_exhausted"
    lines = [header]
    for i, a1 in enumerate(grid.axis1):
        for j, a2 in enumerate(grid.axis2):
            cell = grid.cells[i][j]
            row = f"{a1!r},{a2!r},{cell.trials},{cell.successes},{cell.probability!r}"
            if with_meta:
                row += f",{cell.diverged},{cell.budget_exhausted}"
            lines.append(row)
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


PIXEL_MAX = 255.0


@dataclass
class RecoveryReport:
    """Outcome of one reconstruction run, arrays aligned with trajectory steps."""

    signal_errors: np.ndarray  # |x_t - x_true| per recorded step
    trajectory: TrainTrajectory
    certificate: Certificate
    bounds: BoundSeries | None
    early_stop: float | None
    psnr_final: float
    files: list = field(default_factory=list)


def _snapshot_schedule(steps: int) -> tuple:
    """Logarithmic checkpoints 0, 1, 2, 4, ... plus the final budget step."""
    marks = {0}
    t = 1
    while t < steps:
        marks.add(t)
        t *= 2
    marks.add(steps)
    return tuple(sorted(marks))


def deblur_pipeline(
    image_path,
    sigma_blur: float,
    noise_std: float,
    k: int,
    d: int,
    steps: int,
    gamma_mode: float | Auto,
    master_seed: int,
    out_dir,
    op_kind: str = "blur",
    spec_lo: float = 1.0,
    spec_hi: float = 2.0,
    activation: str = "sigmoid",
    train_mode: str = "both",
    lipschitz_c0: float = 2.0,
) -> RecoveryReport:
    """Reconstruct a PGM image through a blur or crafted-spectrum operator.

    Training happens at pixel scale ([0, 255] values, noise_std in pixel
    units), where the random init output is negligible next to the target;
    snapshots, trajectory, bound series, and a manifest of written files
    land in out_dir.  The default curvature multiplier is the image-regime
    calibration (the initial-misfit term dominates there); pass the global
    default for other regimes.
    """
    img = pgm.read_pgm(image_path)
    if img.shape[0] != img.shape[1]:
        raise ValueError("square images only")
    side = img.shape[0]
    n = side * side
    x_true = img.ravel().copy()

    if op_kind == "blur":
        op = gaussian_blur_operator(side, sigma_blur)
    elif op_kind == "crafted":
        op = crafted_spectrum_operator(n, spec_lo, spec_hi, derive_seed(master_seed, 0))
    else:
        raise ValueError(f"unknown operator kind {op_kind!r}")

    inst = make_instance(op, x_true, noise_std, derive_seed(master_seed, 1))
    act = ACTIVATIONS[activation]()
    net, p0 = init_network(d, k, n, act, train_mode, derive_seed(master_seed, 2))
    loss = mse(inst.y)

    snap_steps = _snapshot_schedule(steps)
    cfg = TrainConfig(
        gamma=gamma_mode,
        max_steps=steps,
        loss_stop=1e-14,
        signal_target=x_true,
        snapshot_steps=snap_steps,
        lipschitz_c0=lipschitz_c0,
    )

    cert = certify(net, p0, inst, loss, gamma_mode, c0=cfg.lipschitz_c0)
    traj = gd_train(net, p0, inst, loss, cfg)

    bounds = None
    stop_tau = None
    if cert.holds:
        bounds = bound_series(cert, loss, traj.steps_run)
        if inst.noise_norm > 0.0:
            stop_tau = early_stop_tau(cert, loss, inst.noise_norm)

    os.makedirs(out_dir, exist_ok=True)
    files = []

    traj_path = os.path.join(out_dir, "trajectory.csv")
    trajectory_to_csv(traj, traj_path)
    files.append("trajectory.csv")

    rec_path = os.path.join(out_dir, "recovery.csv")
    with open(rec_path, "w") as fh:
        fh.write("step,x_err\n")
        for t, err in enumerate(traj.signal_error):
            fh.write(f"{t},{float(err)!r}\n")
    files.append("recovery.csv")

    if bounds is not None:
        bpath = os.path.join(out_dir, "bounds.csv")
        bound_series_to_csv(bounds, bpath)
        files.append("bounds.csv")

    for t in sorted(traj.snapshots):
        name = f"step_{t}.pgm"
        snap = np.clip(traj.snapshots[t], 0.0, PIXEL_MAX).reshape(side, side)
        pgm.write_pgm(os.path.join(out_dir, name), snap)
        files.append(name)

    x_rec = np.clip(traj.x_final, 0.0, PIXEL_MAX)
    mse_pix = float(np.mean((x_rec - img.ravel()) ** 2))
    psnr = float("inf") if mse_pix == 0.0 else 10.0 * np.log10(PIXEL_MAX**2 / mse_pix)

    manifest = os.path.join(out_dir, "manifest.txt")
    with open(manifest, "w") as fh:
        fh.write("\n".join(files) + "\n")
    files.append("manifest.txt")

    return RecoveryReport(
        signal_errors=traj.signal_error,
        trajectory=traj,
        certificate=cert,
        bounds=bounds,
        early_stop=stop_tau,
        psnr_final=psnr,
        files=files,
    )
