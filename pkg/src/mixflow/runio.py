"""Run artifacts: config hashing, manifests, CSV writers, checkpoint cache.

All data files are written with full round-trip float precision and
deterministic ordering so reruns with the same seed and config are
byte-identical; manifests carry the only timestamps and are written last.
"""

import hashlib
import json
import os
import time
from dataclasses import dataclass, field

import numpy as np

from .net import Checkpoint, load_checkpoint, save_checkpoint


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def config_hash(config: dict) -> str:
    """sha256 of the canonical JSON encoding; stable under key reordering."""
    return hashlib.sha256(canonical_json(config).encode()).hexdigest()


def _fmt(v) -> str:
    return repr(float(v))


@dataclass
class RunManifest:
    command: str
    config_hash: str
    seed: int
    tool_version: str
    started_at: str
    finished_at: str = ""
    outputs: list = field(default_factory=list)
    config: dict = field(default_factory=dict)

    @classmethod
    def start(cls, command: str, config: dict, seed: int) -> "RunManifest":
        from . import __version__

        return cls(command=command, config_hash=config_hash(config), seed=seed,
                   tool_version=__version__, started_at=_now(), config=config)

    def finish(self, out_dir, outputs) -> str:
        """Verify outputs exist, stamp the end time, write manifest.json last."""
        out_dir = str(out_dir)
        rel = []
        for p in outputs:
            p = str(p)
            if not os.path.exists(p):
                raise FileNotFoundError(f"manifest lists missing output {p}")
            rel.append(os.path.relpath(p, out_dir))
        self.outputs = sorted(rel)
        self.finished_at = _now()
        path = os.path.join(out_dir, "manifest.json")
        with open(path, "w") as f:
            json.dump({
                "command": self.command,
                "config_hash": self.config_hash,
                "seed": self.seed,
                "tool_version": self.tool_version,
                "started_at": self.started_at,
                "finished_at": self.finished_at,
                "outputs": self.outputs,
                "config": self.config,
            }, f, indent=2, sort_keys=True)
        return path


def _now() -> str:
    return time.strftime("%Y-%m-%dT%H:%M:%S", time.gmtime()) + "Z"


def write_loss_csv(path, loss_log) -> None:
    with open(path, "w") as f:
        f.write("iteration,loss\n")
        for it, loss in loss_log:
            f.write(f"{it},{_fmt(loss)}\n")


def read_loss_csv(path):
    out = []
    with open(path) as f:
        next(f)
        for line in f:
            it, loss = line.strip().split(",")
            out.append((int(it), float(loss)))
    return out


def write_samples_csv(path, x) -> None:
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    cols = ",".join(f"x_{j}" for j in range(x.shape[1]))
    with open(path, "w") as f:
        f.write(f"path_id,{cols}\n")
        for i, row in enumerate(x):
            f.write(f"{i}," + ",".join(_fmt(v) for v in row) + "\n")


def write_trajectory_csv(path, trajectory) -> None:
    with open(path, "w") as f:
        d = trajectory.states[0].shape[1]
        cols = ",".join(f"x_{j}" for j in range(d))
        f.write(f"path_id,t,{cols}\n")
        n = trajectory.states[0].shape[0]
        for i in range(n):
            for t, state in zip(trajectory.times, trajectory.states):
                f.write(f"{i},{_fmt(t)}," + ",".join(_fmt(v) for v in state[i]) + "\n")


def write_density_csv(path, density) -> None:
    with open(path, "w") as f:
        f.write("x,density\n")
        for x, v in zip(density.grid, density.values):
            f.write(f"{_fmt(x)},{_fmt(v)}\n")


def write_slowflow_csv(path, report) -> None:
    with open(path, "w") as f:
        f.write("t,min_m,max_m,median_m,mean_m,clamped_fraction\n")
        for i, t in enumerate(report.sampling_times):
            f.write(",".join(_fmt(v) for v in (
                t, report.min_m[i], report.max_m[i], report.median_m[i],
                report.mean_m[i], report.clamped_fraction[i])) + "\n")


def cached_checkpoint_path(cache_dir, cfg_hash: str) -> str:
    return os.path.join(str(cache_dir), f"{cfg_hash}.json")


def load_cached_checkpoint(cache_dir, cfg_hash: str) -> Checkpoint | None:
    path = cached_checkpoint_path(cache_dir, cfg_hash)
    if os.path.exists(path):
        return load_checkpoint(path)
    return None


def store_cached_checkpoint(cache_dir, cfg_hash: str, checkpoint: Checkpoint) -> str:
    os.makedirs(str(cache_dir), exist_ok=True)
    path = cached_checkpoint_path(cache_dir, cfg_hash)
    save_checkpoint(checkpoint, path)
    return path
