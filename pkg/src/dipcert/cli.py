"""Command-line entry point: train, certify, grid-bndr, grid-gamma, deblur, bounds.

Exit codes: 0 success, 1 config error, 2 divergence, 3 certificate fails.
Every run echoes its effective configuration into the output directory;
re-running from that echo reproduces all outputs byte for byte.
"""

import argparse
import os
import sys

import numpy as np

from .certificates import (
    bound_series,
    bound_series_to_csv,
    certificate_report_lines,
    certify,
    read_certificate_report,
)
from .config import ConfigError, effective_config_text, load_config
from .experiments import (
    deblur_pipeline,
    derive_seed,
    grid_certificate,
    grid_convergence,
    grid_to_csv,
)
from .losses import LossModel, lojasiewicz, mse
from .network import ACTIVATIONS, init_network
from .operators import crafted_spectrum_operator, gaussian_operator, make_instance
from .trainer import Auto, TrainConfig, gd_train, read_trajectory_csv, trajectory_to_csv

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_DIVERGED = 2
EXIT_NO_CERT = 3


def _echo_config(command, cfg):
    os.makedirs(cfg["out"], exist_ok=True)
    with open(os.path.join(cfg["out"], "effective.cfg"), "w") as fh:
        fh.write(effective_config_text(command, cfg))


def _gamma_mode(cfg):
    if cfg["gamma"] == "auto":
        return Auto(cfg["auto_lambda"])
    return float(cfg["gamma"])


def _build_problem(cfg):
    """Operator, instance, network, params from a train/certify config."""
    seed = cfg["seed"]
    if cfg["operator"] == "crafted":
        op = crafted_spectrum_operator(
            cfg["n"], cfg["spec_lo"], cfg["spec_hi"], derive_seed(seed, 0), m=cfg["m"]
        )
    else:
        op = gaussian_operator(cfg["m"], cfg["n"], derive_seed(seed, 0))
    rng = np.random.Generator(np.random.PCG64(derive_seed(seed, 1)))
    x_true = rng.standard_normal(cfg["n"])
    if cfg["x_unit"]:
        x_true = x_true / np.linalg.norm(x_true)
    x_true = cfg["x_scale"] * x_true
    inst = make_instance(op, x_true, cfg["noise_std"], derive_seed(seed, 2))
    act = ACTIVATIONS[cfg["activation"]]()
    net, p0 = init_network(
        cfg["d"], cfg["k"], cfg["n"], act, cfg["train_mode"], derive_seed(seed, 3)
    )
    if cfg["loss"] == "mse":
        loss = mse(inst.y)
    else:
        loss = lojasiewicz(inst.y, cfg["loja_c"], cfg["loja_alpha"])
    return op, inst, net, p0, loss


def cmd_train(cfg) -> int:
    _echo_config("train", cfg)
    op, inst, net, p0, loss = _build_problem(cfg)
    gamma = _gamma_mode(cfg)
    cert = certify(net, p0, inst, loss, gamma, c0=cfg["lipschitz_c0"])
    with open(os.path.join(cfg["out"], "certificate.txt"), "w") as fh:
        fh.write("\n".join(certificate_report_lines(cert)) + "\n")

    tc = TrainConfig(
        gamma=gamma,
        max_steps=cfg["max_steps"],
        loss_stop=cfg["loss_stop"],
        record_sigma_every=cfg["record_sigma_every"],
        lipschitz_c0=cfg["lipschitz_c0"],
    )
    traj = gd_train(net, p0, inst, loss, tc)
    trajectory_to_csv(traj, os.path.join(cfg["out"], "trajectory.csv"))
    if cert.holds:
        series = bound_series(cert, loss, traj.steps_run)
        bound_series_to_csv(series, os.path.join(cfg["out"], "bounds.csv"))
    if traj.diverged:
        print("training diverged", file=sys.stderr)
        return EXIT_DIVERGED
    return EXIT_OK


def cmd_certify(cfg) -> int:
    _echo_config("certify", cfg)
    op, inst, net, p0, loss = _build_problem(cfg)
    cert = certify(net, p0, inst, loss, _gamma_mode(cfg), c0=cfg["lipschitz_c0"])
    report = "\n".join(certificate_report_lines(cert)) + "\n"
    sys.stdout.write(report)
    with open(os.path.join(cfg["out"], "certificate.txt"), "w") as fh:
        fh.write(report)
    return EXIT_OK if cert.holds else EXIT_NO_CERT


def cmd_grid_bndr(cfg) -> int:
    _echo_config("grid-bndr", cfg)
    grid = grid_certificate(
        m_list=cfg["m_list"],
        k_list=cfg["k_list"],
        n=cfg["n"],
        d=cfg["d"],
        trials=cfg["trials"],
        master_seed=cfg["seed"],
        op_kind=cfg["operator"],
        activation=cfg["activation"],
        train_mode=cfg["train_mode"],
        auto_lam=cfg["auto_lambda"],
        spec_lo=cfg["spec_lo"],
        spec_hi=cfg["spec_hi"],
        x_unit=cfg["x_unit"],
        workers=cfg["threads"],
    )
    grid_to_csv(grid, os.path.join(cfg["out"], "grid.csv"))
    return EXIT_OK


def cmd_grid_gamma(cfg) -> int:
    _echo_config("grid-gamma", cfg)
    grid = grid_convergence(
        n_list=cfg["n_list"],
        gamma_list=cfg["gamma_list"],
        m_ratio=cfg["m_ratio"],
        k=cfg["k"],
        d=cfg["d"],
        trials=cfg["trials"],
        steps=cfg["steps"],
        loss_stop=cfg["loss_stop"],
        master_seed=cfg["seed"],
        activation=cfg["activation"],
        train_mode=cfg["train_mode"],
        workers=cfg["threads"],
    )
    grid_to_csv(grid, os.path.join(cfg["out"], "grid.csv"))
    grid_to_csv(grid, os.path.join(cfg["out"], "grid_meta.csv"), with_meta=True)
    return EXIT_OK


def cmd_deblur(cfg) -> int:
    _echo_config("deblur", cfg)
    report = deblur_pipeline(
        image_path=cfg["image"],
        sigma_blur=cfg["blur_sigma"],
        noise_std=cfg["noise_std"],
        k=cfg["k"],
        d=cfg["d"],
        steps=cfg["steps"],
        gamma_mode=_gamma_mode(cfg),
        master_seed=cfg["seed"],
        out_dir=cfg["out"],
        op_kind=cfg["operator"],
        spec_lo=cfg["spec_lo"],
        spec_hi=cfg["spec_hi"],
        activation=cfg["activation"],
        train_mode=cfg["train_mode"],
        lipschitz_c0=cfg["lipschitz_c0"],
    )
    if report.trajectory.diverged:
        print("training diverged", file=sys.stderr)
        return EXIT_DIVERGED
    return EXIT_OK


def cmd_bounds(cfg) -> int:
    _echo_config("bounds", cfg)
    cert = read_certificate_report(cfg["certificate"])
    cols = read_trajectory_csv(cfg["trajectory"])
    steps = len(cols["step"]) - 1
    if cfg["loss"] == "mse":
        loss = mse(np.zeros(1))
    else:
        loss = lojasiewicz(np.zeros(1), cfg["loja_c"], cfg["loja_alpha"])
    recovery = None
    if cfg["lambda_min"] > 0.0:
        recovery = (cfg["lambda_min"], cfg["dist_sigma"], cfg["noise_norm"])
    try:
        series = bound_series(cert, loss, steps, recovery_inputs=recovery)
    except ValueError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_NO_CERT
    bound_series_to_csv(series, os.path.join(cfg["out"], "bounds.csv"))
    return EXIT_OK


COMMANDS = {
    "train": cmd_train,
    "certify": cmd_certify,
    "grid-bndr": cmd_grid_bndr,
    "grid-gamma": cmd_grid_gamma,
    "deblur": cmd_deblur,
    "bounds": cmd_bounds,
}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="dipcert",
        description="Train two-layer deep inverse prior networks with convergence certificates",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", default=None, help="key = value config file")
        p.add_argument("--seed", type=int, default=None, help="override the config seed")
        p.add_argument("--out", default=None, help="override the output directory")
    args = parser.parse_args(argv)

    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.out is not None:
        overrides["out"] = args.out
    try:
        cfg = load_config(args.command, args.config, overrides)
    except (ConfigError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return COMMANDS[args.command](cfg)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
