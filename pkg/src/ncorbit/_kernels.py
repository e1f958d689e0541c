"""Execution-mode selection for the hot kernels.

By default the kernels in ``_kernels_impl`` are compiled with numba's
nopython mode.  Setting the environment variable ``NCORBIT_JIT=0`` (or
running without numba installed) selects the interpreted pure NumPy/Python
path instead - same source, no compilation, roughly two to three orders of
magnitude slower.  ``benchmarks/integrator_benchmark.py`` compares the two.
"""

from __future__ import annotations

import importlib.util
import os

_KERNEL_NAMES = (
    "hamiltonian_kernel",
    "rhs_kernel",
    "_initial_step",
    "integrate_kernel",
)

_ENV_FLAG = "NCORBIT_JIT"


def jit_requested() -> bool:
    return os.environ.get(_ENV_FLAG, "1").strip().lower() not in ("0", "false", "no", "off")


def load_kernels(use_jit: bool):
    """Fresh kernel module instance, optionally numba-compiled.

    Each call returns an independent module object, so jitted and
    interpreted variants can coexist in one process (the benchmark and the
    equivalence tests rely on this).
    """
    spec = importlib.util.find_spec("ncorbit._kernels_impl")
    mod = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(mod)
    mod.USING_JIT = False
    if use_jit:
        from numba import njit

        decorate = njit(cache=True, nogil=True)
        # leaf functions first so the propagator compiles against them
        for name in _KERNEL_NAMES:
            setattr(mod, name, decorate(getattr(mod, name)))
        mod.USING_JIT = True
    return mod


def _select():
    if not jit_requested():
        return load_kernels(False)
    try:
        import numba  # noqa: F401
    except ImportError:
        return load_kernels(False)
    return load_kernels(True)


kernels = _select()
USING_JIT: bool = kernels.USING_JIT
