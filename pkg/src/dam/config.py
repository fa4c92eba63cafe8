"""Flat ``key = value`` run configuration."""

from __future__ import annotations

from dataclasses import dataclass, field, fields
from pathlib import Path

from .model import VARIANTS, Hyperparams


class ConfigError(ValueError):
    pass


PATH_KEYS = ("train_path", "dev_path", "test_path", "pretrained_path", "checkpoint_path", "output_dir")
_INPUT_PATHS = ("train_path", "dev_path", "test_path", "pretrained_path")


@dataclass
class RunConfig:
    hp: Hyperparams = field(default_factory=Hyperparams)
    variant: str = "dual"
    train_path: Path | None = None
    dev_path: Path | None = None
    test_path: Path | None = None
    pretrained_path: Path | None = None
    checkpoint_path: Path | None = None
    output_dir: Path = Path("run")

    @property
    def checkpoint(self) -> Path:
        return self.checkpoint_path or self.output_dir / "model.ckpt"

    def check_paths(self) -> None:
        if self.train_path is None:
            raise ConfigError("train_path is required")
        for key in _INPUT_PATHS:
            p = getattr(self, key)
            if p is not None and not p.exists():
                raise ConfigError(f"{key} does not exist: {p}")

    def to_text(self) -> str:
        lines = [f"variant = {self.variant}"]
        for key in PATH_KEYS:
            v = getattr(self, key)
            if v is not None:
                lines.append(f"{key} = {v}")
        for k, v in self.hp.to_dict().items():
            lines.append(f"{k} = {_format(v)}")
        return "\n".join(lines) + "\n"


def known_keys() -> list[str]:
    return ["variant", *PATH_KEYS, *(f.name for f in fields(Hyperparams))]


def _format(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    return repr(v) if isinstance(v, float) else str(v)


def _hp_types() -> dict[str, str]:
    return {f.name: str(f.type) for f in fields(Hyperparams)}


def _convert(key: str, raw: str):
    kind = _hp_types()[key]
    try:
        if kind == "bool":
            low = raw.strip().lower()
            if low not in ("true", "false", "1", "0", "yes", "no"):
                raise ValueError
            return low in ("true", "1", "yes")
        if kind.startswith("int"):
            return int(raw)
        if kind == "float":
            return float(raw)
    except ValueError:
        raise ConfigError(f"bad value for {key}: {raw!r} (expected {kind})") from None
    raise ConfigError(f"unsupported type for {key}")


def parse_config_text(text: str) -> dict[str, str]:
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in known_keys():
            raise ConfigError(f"line {lineno}: unknown config key {key!r}")
        out[key] = value
    return out


def build_config(file_values: dict[str, str], overrides: dict[str, str] | None = None,
                 base_dir: Path | None = None) -> RunConfig:
    """Merge file values and command-line overrides into a RunConfig.

    Relative paths from the file resolve against ``base_dir``; override paths
    are taken as given (relative to the working directory).
    """
    overrides = overrides or {}
    for key in overrides:
        if key not in known_keys():
            raise ConfigError(f"unknown config key {key!r}")
    merged: dict[str, tuple[str, bool]] = {k: (v, True) for k, v in file_values.items()}
    merged.update({k: (v, False) for k, v in overrides.items()})

    hp_values = {}
    cfg = RunConfig()
    for key, (raw, from_file) in merged.items():
        if key == "variant":
            if raw not in VARIANTS:
                raise ConfigError(f"unknown variant {raw!r}; expected one of {', '.join(VARIANTS)}")
            cfg.variant = raw
        elif key in PATH_KEYS:
            p = Path(raw)
            if from_file and base_dir is not None and not p.is_absolute():
                p = base_dir / p
            setattr(cfg, key, p)
        else:
            hp_values[key] = _convert(key, raw)
    try:
        cfg.hp = Hyperparams(**hp_values)
    except ValueError as e:
        raise ConfigError(str(e)) from None
    return cfg


def load_config(path: str | Path | None, overrides: dict[str, str] | None = None) -> RunConfig:
    if path is None:
        return build_config({}, overrides)
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file does not exist: {path}")
    return build_config(parse_config_text(path.read_text(encoding="utf-8")), overrides, path.parent)
