"""Flat key = value run configuration: parse, validate, echo.

One ``key = value`` pair per line, ``#`` starts a comment.  Each subcommand
has a schema; unknown keys are rejected and missing required keys are
reported by name.  The effective config (defaults filled in) can be written
back out and re-parsed to identical values, which is how reruns reproduce
outputs byte for byte.
"""

from dataclasses import dataclass


class ConfigError(Exception):
    pass


REQUIRED = object()


def _parse_bool(raw: str) -> bool:
    if raw in ("true", "1", "yes"):
        return True
    if raw in ("false", "0", "no"):
        return False
    raise ConfigError(f"expected a boolean, got {raw!r}")


def _parse_gamma(raw: str):
    if raw == "auto":
        return "auto"
    return float(raw)


def _parse_int_list(raw: str) -> list:
    return [int(tok) for tok in raw.split(",") if tok.strip()]


def _parse_float_list(raw: str) -> list:
    return [float(tok) for tok in raw.split(",") if tok.strip()]


def _parse_choice(*options):
    def parse(raw: str) -> str:
        if raw not in options:
            raise ConfigError(f"expected one of {options}, got {raw!r}")
        return raw

    return parse


_PROBLEM_KEYS = {
    "n": (int, REQUIRED),
    "m": (int, REQUIRED),
    "d": (int, REQUIRED),
    "k": (int, REQUIRED),
    "operator": (_parse_choice("crafted", "gaussian"), "crafted"),
    "spec_lo": (float, 1.0),
    "spec_hi": (float, 2.0),
    "activation": (_parse_choice("sigmoid", "tanh"), "sigmoid"),
    "train_mode": (_parse_choice("fixed_v", "both"), "fixed_v"),
    "loss": (_parse_choice("mse", "lojasiewicz"), "mse"),
    "loja_c": (float, 1.0),
    "loja_alpha": (float, 0.5),
    "x_scale": (float, 1.0),
    "x_unit": (_parse_bool, True),
    "noise_std": (float, 0.0),
    "seed": (int, 0),
    "out": (str, "out"),
    "threads": (int, 1),
}

_STEP_KEYS = {
    "gamma": (_parse_gamma, "auto"),
    "auto_lambda": (float, 0.1),
    "lipschitz_c0": (float, 64.0),
}

SCHEMAS = {
    "train": {
        **_PROBLEM_KEYS,
        **_STEP_KEYS,
        "max_steps": (int, 3000),
        "loss_stop": (float, 1e-14),
        "record_sigma_every": (int, 0),
    },
    "certify": {**_PROBLEM_KEYS, **_STEP_KEYS},
    "grid-bndr": {
        "n": (int, 5),
        "d": (int, 10),
        "m_list": (_parse_int_list, [1, 2, 3, 4, 5]),
        "k_list": (_parse_int_list, [2**j for j in range(4, 13)]),
        "trials": (int, 50),
        "operator": (_parse_choice("crafted", "gaussian"), "crafted"),
        "spec_lo": (float, 1.0),
        "spec_hi": (float, 2.0),
        "activation": (_parse_choice("sigmoid", "tanh"), "sigmoid"),
        "train_mode": (_parse_choice("fixed_v", "both"), "fixed_v"),
        "auto_lambda": (float, 0.1),
        "x_unit": (_parse_bool, True),
        "seed": (int, 0),
        "out": (str, "out"),
        "threads": (int, 1),
    },
    "grid-gamma": {
        "n_list": (_parse_int_list, [5, 10, 20, 40]),
        "gamma_list": (
            _parse_float_list,
            [0.001, 0.00268, 0.00719, 0.0193, 0.0518, 0.139, 0.373, 1.0],
        ),
        "m_ratio": (float, 0.6),
        "k": (int, 4096),
        "d": (int, 10),
        "trials": (int, 10),
        "steps": (int, 2000),
        "loss_stop": (float, 1e-14),
        "activation": (_parse_choice("sigmoid", "tanh"), "tanh"),
        "train_mode": (_parse_choice("fixed_v", "both"), "both"),
        "seed": (int, 0),
        "out": (str, "out"),
        "threads": (int, 1),
    },
    "deblur": {
        "image": (str, REQUIRED),
        "k": (int, REQUIRED),
        "d": (int, REQUIRED),
        "steps": (int, REQUIRED),
        "operator": (_parse_choice("blur", "crafted"), "blur"),
        "blur_sigma": (float, 1.0),
        "spec_lo": (float, 1.0),
        "spec_hi": (float, 2.0),
        "noise_std": (float, 0.0),
        "gamma": (_parse_gamma, "auto"),
        "auto_lambda": (float, 1.0),
        "lipschitz_c0": (float, 2.0),
        "activation": (_parse_choice("sigmoid", "tanh"), "sigmoid"),
        "train_mode": (_parse_choice("fixed_v", "both"), "both"),
        "seed": (int, 0),
        "out": (str, "out"),
        "threads": (int, 1),
    },
    "bounds": {
        "trajectory": (str, REQUIRED),
        "certificate": (str, REQUIRED),
        "loss": (_parse_choice("mse", "lojasiewicz"), "mse"),
        "loja_c": (float, 1.0),
        "loja_alpha": (float, 0.5),
        "lambda_min": (float, 0.0),
        "dist_sigma": (float, 0.0),
        "noise_norm": (float, 0.0),
        "seed": (int, 0),
        "out": (str, "out"),
        "threads": (int, 1),
    },
}


def parse_config_text(text: str) -> dict:
    """Raw key -> string value pairs; syntax check only."""
    raw = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {body!r}")
        key, _, value = body.partition("=")
        key, value = key.strip(), value.strip()
        if not key or not value:
            raise ConfigError(f"line {lineno}: empty key or value")
        if key in raw:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        raw[key] = value
    return raw


def resolve(command: str, raw: dict) -> dict:
    """Typed config for a subcommand, defaults filled, schema enforced."""
    schema = SCHEMAS[command]
    unknown = set(raw) - set(schema)
    if unknown:
        raise ConfigError(f"unknown key(s): {', '.join(sorted(unknown))}")
    cfg = {}
    for key, (parse, default) in schema.items():
        if key in raw:
            try:
                cfg[key] = parse(raw[key])
            except ConfigError:
                raise
            except ValueError as exc:
                raise ConfigError(f"key {key!r}: {exc}") from exc
        elif default is REQUIRED:
            raise ConfigError(f"missing required key: {key}")
        else:
            cfg[key] = default
    return cfg


def load_config(command: str, path, overrides: dict | None = None) -> dict:
    if path is None:
        raw = {}
    else:
        with open(path, "r") as fh:
            raw = parse_config_text(fh.read())
    if overrides:
        raw.update({k: str(v) for k, v in overrides.items()})
    return resolve(command, raw)


def format_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, list):
        return ",".join(format_value(v) for v in value)
    return str(value)


def effective_config_text(command: str, cfg: dict) -> str:
    """Canonical echo of the resolved config; re-parsing reproduces it."""
    lines = [f"# {command}"]
    for key in SCHEMAS[command]:
        lines.append(f"{key} = {format_value(cfg[key])}")
    return "\n".join(lines) + "\n"
