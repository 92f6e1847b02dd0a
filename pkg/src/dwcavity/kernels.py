"""Selects between the jitted and plain-numpy kernel implementations.

The implementations live in ``_impl`` (one source file).  On import this
module loads a second, independent copy of that file and wraps each kernel
in ``numba.njit``, unless the environment variable ``DWCAVITY_NUMBA`` is set
to ``0``/``off``/``false``/``no`` or numba is not importable, in which case
the plain copy serves as the active path.

Both namespaces stay importable side by side:

* :data:`active` — the path used by the package (jitted when available),
* :data:`numpy_impl` — always the plain-numpy copy,

which is what the agreement tests and the benchmark rely on.
"""

import importlib.util
import os

from . import _impl as numpy_impl

__all__ = list(numpy_impl.KERNEL_NAMES) + [
    "active", "numpy_impl", "NUMBA_ENABLED", "NREC",
]


def _load_jitted():
    from numba import njit

    spec = importlib.util.find_spec("dwcavity._impl")
    mod = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(mod)
    # Rebind every kernel to its jitted wrapper before anything compiles, so
    # cross-kernel calls resolve to jitted dispatchers at compile time.
    for name in mod.KERNEL_NAMES:
        setattr(mod, name, njit(cache=True, nogil=True)(getattr(mod, name)))
    return mod


_flag = os.environ.get("DWCAVITY_NUMBA", "1").strip().lower()
NUMBA_ENABLED = False
active = numpy_impl
if _flag not in ("0", "off", "false", "no"):
    try:
        active = _load_jitted()
        NUMBA_ENABLED = True
    except ImportError:
        pass

NREC = numpy_impl.NREC

compute_omega_shift = active.compute_omega_shift
cubic_roots = active.cubic_roots
reduced_roots = active.reduced_roots
recover_drive = active.recover_drive
root_fields = active.root_fields
build_drift = active.build_drift
noise_diag = active.noise_diag
input_coupling_diag = active.input_coupling_diag
drift_eig_info = active.drift_eig_info
lyapunov_solve = active.lyapunov_solve
lyapunov_residual = active.lyapunov_residual
symplectic_eigs = active.symplectic_eigs
reduce_pair = active.reduce_pair
pt_symplectic_min = active.pt_symplectic_min
logneg_value = active.logneg_value
min_variance = active.min_variance
cell_eval = active.cell_eval
grid_eval = active.grid_eval
spectrum_curve = active.spectrum_curve
