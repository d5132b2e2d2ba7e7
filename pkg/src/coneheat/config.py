"""Experiment configuration: TOML files validated against a strict schema.

One file per experiment; nested tables mirror the module structure.  Unknown
keys are rejected before any computation so that typos cannot silently
reconfigure a run.
"""

from __future__ import annotations

import hashlib
import json
import sys
from dataclasses import dataclass
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

import numpy as np

from .cone import ConeModel, FlatTorusLink, RoundSphereLink
from .link_spectra import load_spectrum
from .solver import RadialGrid, SchemeParams, SourceMode

__all__ = ["ConfigError", "ExperimentConfig", "load_config", "config_hash"]


class ConfigError(ValueError):
    """Schema violation in an experiment file."""


_MODEL_KEYS = {"m", "R_out", "lambda_max", "link"}
_LINK_KEYS = {"type", "radius", "lattice", "path", "file"}
_SOLVE_KEYS = {"gamma", "T", "J", "K", "q", "n_startup", "sources", "times"}
_SOURCE_KEYS = {"lambda", "coef", "r_power", "t_power", "chi_scale", "eigen_index"}
_INDEX_KEYS = {"delta_min", "delta_max", "delta_step", "skip_near"}
_KERNEL_KEYS = {
    "n_scaling_samples", "t_grid", "r_grid", "theta_points", "gamma",
    "r_stages", "y_radius", "diag_t",
}
_DECAY_KEYS = {
    "gamma", "T", "J", "K", "R_out", "chi_scale", "r_power",
    "proj_window", "fit_window", "predicted_exponent", "tolerance", "orders",
}
_ESTIMATE_KEYS = {
    "gamma", "t_grid", "r_min", "r_max", "n_r", "refinements",
    "shift", "xi_min", "negative_control_gamma",
}
_YOUNG_KEYS = {"p", "delta", "eps", "f_power", "chi_scale", "horizon", "n_t", "n_r"}
_BASIS_KEYS = {"gamma"}
_TOP_KEYS = {
    "model", "solve", "index", "basis", "kernel_check", "decay", "estimate",
    "young", "seed", "title", "command",
}


def _check_keys(table: dict, allowed: set[str], where: str) -> None:
    unknown = set(table) - allowed
    if unknown:
        raise ConfigError(f"unknown keys {sorted(unknown)} in [{where}]")


@dataclass(frozen=True)
class ExperimentConfig:
    """Validated experiment file plus the seed binding randomized sampling."""

    raw: dict
    path: Path | None
    seed: int

    def model(self) -> ConeModel:
        if "model" not in self.raw:
            raise ConfigError("missing [model] table")
        block = self.raw["model"]
        link_cfg = block["link"]
        if link_cfg["type"] == "sphere":
            m = int(block["m"])
            link = RoundSphereLink(m, float(link_cfg.get("radius", 1.0)))
        elif link_cfg["type"] == "torus":
            link = FlatTorusLink.from_matrix(np.array(link_cfg["lattice"], dtype=float))
        elif link_cfg["type"] == "file":
            raise ConfigError(
                "file links carry no pointwise geometry; only spectral and "
                "indicial commands support them"
            )
        else:
            raise ConfigError(f"unknown link type {link_cfg['type']!r}")
        if link.dim + 1 != int(block["m"]):
            raise ConfigError(
                f"link dimension {link.dim} inconsistent with m={block['m']}"
            )
        return ConeModel.build(link, float(block["R_out"]), float(block["lambda_max"]))

    def spectrum_only(self, strict: bool = True):
        """The link spectrum; ``strict`` refuses possibly-disconnected links.

        Theorem-checking commands keep strict=True: a user file without the
        lambda=0 row only carries a warning flag from the loader, but the
        index identities assume a connected link.
        """
        block = self.raw["model"]
        link_cfg = block["link"]
        if link_cfg["type"] == "file":
            path = link_cfg.get("path") or link_cfg.get("file")
            spectrum = load_spectrum(path)
            if strict and spectrum.zero_mode_missing:
                raise ConfigError(
                    "user spectrum lacks the lambda=0 row (link may be "
                    "disconnected); theorem-checking runs refuse it"
                )
            return spectrum
        return self.model().spectrum

    def solve_block(self) -> tuple[list[SourceMode], float, RadialGrid, SchemeParams, list[float]]:
        block = self.raw.get("solve")
        if block is None:
            raise ConfigError("missing [solve] table")
        sources = [
            SourceMode(
                lam=float(s["lambda"]),
                coef=float(s.get("coef", 1.0)),
                r_power=float(s.get("r_power", 0.0)),
                t_power=int(s.get("t_power", 0)),
                chi_scale=(float(s["chi_scale"]) if "chi_scale" in s else None),
                eigen_index=int(s.get("eigen_index", 0)),
            )
            for s in block["sources"]
        ]
        grid = RadialGrid(
            R_out=float(self.raw["model"]["R_out"]),
            J=int(block["J"]),
            q=float(block.get("q", 2.0)),
        )
        scheme = SchemeParams(
            K=int(block["K"]),
            T=float(block["T"]),
            n_startup=int(block.get("n_startup", 2)),
        )
        return sources, float(block["gamma"]), grid, scheme, list(block.get("times", []))


def _validate(raw: dict) -> None:
    _check_keys(raw, _TOP_KEYS, "top level")
    if "model" in raw:
        _check_keys(raw["model"], _MODEL_KEYS, "model")
        _check_keys(raw["model"].get("link", {}), _LINK_KEYS, "model.link")
        for key in ("m", "R_out", "lambda_max", "link"):
            if key not in raw["model"]:
                raise ConfigError(f"[model] missing key {key!r}")
    if "solve" in raw:
        _check_keys(raw["solve"], _SOLVE_KEYS, "solve")
        for s in raw["solve"].get("sources", []):
            _check_keys(s, _SOURCE_KEYS, "solve.sources")
    if "index" in raw:
        _check_keys(raw["index"], _INDEX_KEYS, "index")
    if "kernel_check" in raw:
        _check_keys(raw["kernel_check"], _KERNEL_KEYS, "kernel_check")
    if "decay" in raw:
        _check_keys(raw["decay"], _DECAY_KEYS, "decay")
    if "estimate" in raw:
        _check_keys(raw["estimate"], _ESTIMATE_KEYS, "estimate")
    if "young" in raw:
        _check_keys(raw["young"], _YOUNG_KEYS, "young")
    if "basis" in raw:
        _check_keys(raw["basis"], _BASIS_KEYS, "basis")


def load_config(path: str | Path, seed: int | None = None) -> ExperimentConfig:
    path = Path(path)
    try:
        raw = tomllib.loads(path.read_text())
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    _validate(raw)
    eff_seed = seed if seed is not None else int(raw.get("seed", 0))
    return ExperimentConfig(raw=raw, path=path, seed=eff_seed)


def config_hash(config: ExperimentConfig) -> str:
    """Deterministic digest binding a report to its inputs."""
    canonical = json.dumps(
        {"raw": config.raw, "seed": config.seed}, sort_keys=True, separators=(",", ":")
    )
    return hashlib.sha256(canonical.encode()).hexdigest()[:16]
