"""Experiment configuration: `key = value` lines, paths relative to the file."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field, fields
from importlib import resources
from pathlib import Path

from ..errors import QlatError


class ConfigError(QlatError):
    pass


def data_path(name: str) -> str:
    return str(resources.files("qlat") / "data" / name)


def _ints(text: str) -> tuple[int, ...]:
    return tuple(int(x) for x in text.replace(",", " ").split())


@dataclass
class ExperimentConfig:
    lattice: str = field(default_factory=lambda: data_path("L5.txt"))
    point: str = field(default_factory=lambda: data_path("L5_point.txt"))
    chains: tuple[str, ...] = field(default_factory=lambda: (data_path("chain_zero.txt"),
                                                             data_path("chain_generic.txt")))
    D: int = 1
    jmin: int = 0
    jmax: int = 0
    X: tuple[int, ...] = (64, 128, 256)
    kappa: float = 0.0
    cusp_bound_constant: float = 1.0
    h_omega: float = 1.0
    point_aut: int = 1
    P_trunc: int = 0  # 0: automatic
    shellmax: int = 8
    height: int = 10**6
    seed: int = 0
    threads: int = 1

    def validate(self):
        for p in (self.lattice, self.point, *self.chains):
            if not Path(p).is_file():
                raise ConfigError(f"cannot read {p}")
        if self.D < 1:
            raise ConfigError("D must be >= 1")
        if self.threads < 1 or self.point_aut < 1 or self.shellmax < 1:
            raise ConfigError("threads, point_aut and shellmax must be positive")
        if any(x < 1 for x in self.X) or self.jmin < 0 or self.jmax < 0:
            raise ConfigError("X values must be positive and j bounds non-negative")
        return self

    def digest(self) -> str:
        """Hash of everything that can change results (not threads)."""
        parts = []
        for f in fields(self):
            if f.name == "threads":
                continue
            val = getattr(self, f.name)
            if f.name in ("lattice", "point"):
                val = Path(val).read_text()
            elif f.name == "chains":
                val = [Path(p).read_text() for p in val]
            parts.append(f"{f.name}={val!r}")
        return hashlib.sha256("\n".join(parts).encode()).hexdigest()[:16]


_CONVERT = {
    "D": int, "jmin": int, "jmax": int, "X": _ints, "kappa": float,
    "cusp_bound_constant": float, "h_omega": float, "point_aut": int, "P_trunc": int,
    "shellmax": int, "height": int, "seed": int, "threads": int,
}


def parse_config(text: str, base_dir: str | Path = ".") -> ExperimentConfig:
    cfg = ExperimentConfig()
    base = Path(base_dir)
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value")
        key, val = (s.strip() for s in line.split("=", 1))
        try:
            if key in ("lattice", "point"):
                setattr(cfg, key, str(base / val))
            elif key == "chains":
                cfg.chains = tuple(str(base / p) for p in val.replace(",", " ").split())
            elif key in _CONVERT:
                setattr(cfg, key, _CONVERT[key](val))
            else:
                raise ConfigError(f"line {lineno}: unknown key {key!r}")
        except ValueError:
            raise ConfigError(f"line {lineno}: bad value for {key}") from None
    return cfg


def load_config(path: str | Path | None) -> ExperimentConfig:
    if path is None:
        return ExperimentConfig()
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {p}: {exc}") from None
    return parse_config(text, p.parent)
