"""Certified gradient-descent training of two-layer deep inverse prior networks."""

from . import certificates, experiments, linalg, losses, network, operators, pgm, trainer

__all__ = [
    "certificates",
    "experiments",
    "linalg",
    "losses",
    "network",
    "operators",
    "pgm",
    "trainer",
]
