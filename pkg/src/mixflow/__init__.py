"""1D flow-matching laboratory.

Trains a small velocity MLP on a two-Gaussian toy distribution with
standard flow-matching, slowed-interpolation-mixture ("MixFlow") and
input-perturbation objectives, samples it with Euler / Heun / SDE /
epsilon-scaled integrators, and measures the slow-flow diagnostic
(how far generated states lag behind the interpolation path).

Submodules are imported lazily so the CLI can configure thread
environment variables before numpy is loaded.
"""

__version__ = "0.1.0"

_SUBMODULES = (
    "errors",
    "seeds",
    "schedules",
    "net",
    "training",
    "sampling",
    "slowflow",
    "evaluation",
    "runio",
    "cli",
)

__all__ = list(_SUBMODULES) + ["__version__"]


def __getattr__(name):
    if name in _SUBMODULES:
        import importlib

        return importlib.import_module(f".{name}", __name__)
    raise AttributeError(f"module {__name__!r} has no attribute {name!r}")
