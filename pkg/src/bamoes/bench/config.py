"""Benchmark configuration (YAML document).

Example::

    datasets:
      - path: series.csv
        metadata: meta.csv      # optional; otherwise horizon/lag below
    horizon: 24
    lag: 6
    seed: 0
    cd_alpha: 0.05
    alpha_levels: [0.5, 0.9, 0.95]
    methods:
      - name: ols-builtin
        base: ols
        ue: builtin
      - name: ols-sbb
        base: ols
        ue: {type: bootstrap, method: sbb, replicas: 30}
      - name: ols-bamoes
        base: ols
        ue: {type: surrogate, variant: BAMOES, C: 0.7, epochs: 300}
      - name: remote-surr1
        base: {transport: subprocess, command: "python3 model.py"}
        ue: {type: surrogate, variant: SurrI}

Relative paths resolve against the config file's directory. ``standardize``
per method defaults to true for ``ols`` and false for external models, which
receive raw lag features.
"""
from __future__ import annotations

import os
from dataclasses import dataclass, field

import yaml

from ..bootstrap import BootstrapConfig
from ..errors import ContractError
from ..models import ExternalModel, OlsModel
from ..surrogate import SurrogateConfig


@dataclass(frozen=True)
class MethodSpec:
    name: str
    base: object  # "ols" or {"transport": ..., "command"/"path": ...}
    ue: dict
    standardize: bool = True

    @property
    def ue_type(self) -> str:
        return self.ue["type"]

    def make_base(self):
        if self.base == "ols":
            return OlsModel()
        return ExternalModel(self.base["transport"], self.base["address"])

    def surrogate_config(self, seed: int) -> SurrogateConfig:
        u = self.ue
        return SurrogateConfig(
            weight_C=float(u.get("C", 0.7)),
            doe_count_L=u.get("L"),
            epochs_M=int(u.get("epochs", 300)),
            learning_rate=float(u.get("learning_rate", 0.05)),
            seed=seed,
            variant=u.get("variant", "BAMOES"),
            kernel_family=u.get("kernel", "rbf"),
        )

    def bootstrap_config(self, seed: int) -> BootstrapConfig:
        u = self.ue
        return BootstrapConfig(
            method=u.get("method", "naive"),
            replicas_B=int(u.get("replicas", 30)),
            mean_block_length=u.get("block_length"),
            ar_order_max=int(u.get("ar_order_max", 5)),
            seed=seed,
        )


@dataclass(frozen=True)
class BenchConfig:
    datasets: tuple
    methods: tuple
    horizon: int | None = None
    lag: int | None = None
    seed: int = 0
    jobs: int = 1
    cd_alpha: float = 0.05
    alpha_levels: tuple = (0.95,)
    ence_bins: int | None = None
    out: str = "results"
    metrics: tuple = field(default=("rmse", "miscal_area", "rmsce", "ence"))

    def __post_init__(self):
        if not self.methods:
            raise ContractError("config lists no methods")
        names = [m.name for m in self.methods]
        if len(set(names)) != len(names):
            raise ContractError(f"method names must be unique: {names}")
        if not self.datasets:
            raise ContractError("config lists no datasets")


def _resolve(path, root):
    return path if os.path.isabs(path) else os.path.normpath(os.path.join(root, path))


def _method(raw, root) -> MethodSpec:
    if "name" not in raw:
        raise ContractError(f"method entry without a name: {raw}")
    base = raw.get("base", "ols")
    if isinstance(base, dict):
        transport = base.get("transport", "subprocess")
        address = base.get("command") if transport == "subprocess" else base.get("path")
        if address is None:
            raise ContractError(f"method {raw['name']!r}: external base needs 'command' or 'path'")
        if transport == "prediction_file":
            address = _resolve(address, root)
        base = {"transport": transport, "address": address}
        default_std = False
    elif base != "ols":
        raise ContractError(f"method {raw['name']!r}: unknown base model {base!r}")
    else:
        default_std = True
    ue = raw.get("ue", "builtin")
    if isinstance(ue, str):
        ue = {"type": ue}
    ue = dict(ue)
    if ue.get("type") not in ("builtin", "bootstrap", "surrogate"):
        raise ContractError(f"method {raw['name']!r}: unknown ue type {ue.get('type')!r}")
    return MethodSpec(str(raw["name"]), base, ue, bool(raw.get("standardize", default_std)))


def config_from_dict(raw: dict, root=".") -> BenchConfig:
    datasets = []
    for d in raw.get("datasets", []):
        if isinstance(d, str):
            d = {"path": d}
        datasets.append({"path": _resolve(d["path"], root),
                         "metadata": _resolve(d["metadata"], root) if d.get("metadata") else None})
    return BenchConfig(
        datasets=tuple(datasets),
        methods=tuple(_method(m, root) for m in raw.get("methods", [])),
        horizon=raw.get("horizon"),
        lag=raw.get("lag"),
        seed=int(raw.get("seed", 0)),
        jobs=int(raw.get("jobs", 1)),
        cd_alpha=float(raw.get("cd_alpha", 0.05)),
        alpha_levels=tuple(float(a) for a in raw.get("alpha_levels", [0.95])),
        ence_bins=raw.get("ence_bins"),
        out=_resolve(raw.get("out", "results"), root),
    )


def load_config(path) -> BenchConfig:
    with open(path, encoding="utf-8") as fh:
        raw = yaml.safe_load(fh) or {}
    return config_from_dict(raw, os.path.dirname(os.path.abspath(path)))
