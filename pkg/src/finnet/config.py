"""Run configuration files: ``key=value`` lines, ``#`` comments.

Recognized keys: problem, method, epochs, lr, seed, mesh_n, hidden
(comma-separated widths), epsilon, out_dir. Missing keys fall back to the
per-problem defaults.
"""

from __future__ import annotations

from pathlib import Path

from .trainer import TrainConfig

KEYS = ("problem", "method", "epochs", "lr", "seed", "mesh_n", "hidden", "epsilon", "out_dir")


class ConfigError(ValueError):
    pass


def _hidden(text: str) -> tuple[int, ...]:
    try:
        widths = tuple(int(t) for t in text.split(",") if t.strip())
    except ValueError:
        raise ConfigError(f"hidden: expected comma-separated integers, got {text!r}") from None
    if not widths:
        raise ConfigError("hidden: empty layer list")
    return widths


_PARSERS = {
    "problem": str,
    "method": str,
    "epochs": int,
    "lr": float,
    "seed": int,
    "mesh_n": int,
    "hidden": _hidden,
    "epsilon": float,
    "out_dir": str,
}


def parse_value(key: str, text: str):
    if key not in _PARSERS:
        raise ConfigError(f"unknown key {key!r}")
    try:
        return _PARSERS[key](text.strip())
    except ConfigError:
        raise
    except ValueError:
        raise ConfigError(f"{key}: cannot parse {text.strip()!r}") from None


def parse_text(text: str, source: str = "<config>") -> dict:
    out = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected key=value, got {raw.strip()!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        try:
            out[key] = parse_value(key, value)
        except ConfigError as exc:
            raise ConfigError(f"{source}:{lineno}: {exc}") from None
    return out


def load(path: str | Path) -> dict:
    return parse_text(Path(path).read_text(), str(path))


def build(values: dict) -> tuple[TrainConfig, str | None]:
    """TrainConfig from parsed values plus per-problem defaults; also returns out_dir."""
    values = dict(values)
    unknown = set(values) - set(KEYS)
    if unknown:
        raise ConfigError(f"unknown key {sorted(unknown)[0]!r}")
    out_dir = values.pop("out_dir", None)
    problem = values.pop("problem", "ode1")
    method = values.pop("method", "finnet")
    try:
        return TrainConfig.paper_defaults(problem, method, **values), out_dir
    except KeyError as exc:
        raise ConfigError(str(exc.args[0])) from None
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def format_real(x: float) -> str:
    return format(float(x), ".17g")


def echo(config: TrainConfig, out_dir: str) -> list[tuple[str, str]]:
    """Config as (key, text) pairs that parse_value maps back to the same values."""
    return [
        ("problem", config.problem),
        ("method", config.method),
        ("epochs", str(config.epochs)),
        ("lr", format_real(config.lr)),
        ("seed", str(config.seed)),
        ("mesh_n", str(config.mesh_n)),
        ("hidden", ",".join(str(w) for w in config.hidden)),
        ("epsilon", format_real(config.epsilon)),
        ("out_dir", out_dir),
    ]
