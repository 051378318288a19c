"""Stepping-kernel backend selection and problem packing.

The compiled extension (``impulse_stab._core``) is preferred; the
pure-Python mirror (``impulse_stab._core_py``) is used when the extension
is missing or when ``IMPULSE_STAB_BACKEND=python`` is set.  Setting
``IMPULSE_STAB_BACKEND=c`` makes a missing extension a hard error instead
of a silent fallback.

Both backends share one calling convention: the problem is flattened into
plain float64/int32 arrays (kinds, scalars, concatenated structure points
with offset tables) so the hot loop never touches Python objects.
"""

from __future__ import annotations

import os

import numpy as np

from .model import Problem


def _select(force: str):
    force = force.strip().lower()
    if force in ("python", "py", "fallback"):
        from . import _core_py

        return _core_py, "python"
    if force not in ("", "auto", "c", "compiled", "ext"):
        raise ValueError(
            f"IMPULSE_STAB_BACKEND must be 'c', 'python' or 'auto', got {force!r}"
        )
    try:
        from . import _core

        return _core, "c"
    except ImportError:
        if force in ("c", "compiled", "ext"):
            raise
        from . import _core_py

        return _core_py, "python"


_impl, _backend = _select(os.environ.get("IMPULSE_STAB_BACKEND", ""))


def backend_name() -> str:
    """Active kernel backend: "c" or "python"."""
    return _backend


def _flat(chunks) -> tuple[np.ndarray, np.ndarray]:
    """Concatenate per-term float tuples, returning (data, offsets); the
    data array is padded with one sentinel so pointers to it stay valid
    even when every chunk is empty."""
    offsets = np.zeros(len(chunks) + 1, dtype=np.int32)
    flat: list[float] = []
    for i, ch in enumerate(chunks):
        flat.extend(ch)
        offsets[i + 1] = len(flat)
    if not flat:
        flat = [0.0]
    return np.asarray(flat, dtype=np.float64), offsets


def _padded(xs) -> np.ndarray:
    arr = np.asarray(list(xs) or [0.0], dtype=np.float64)
    return arr


class PackedProblem:
    """Flattened kernel arguments for one problem (mesh excluded)."""

    def __init__(self, problem: Problem):
        m = problem.m
        c_kind = np.empty(m, dtype=np.int32)
        c_val = np.empty(m, dtype=np.float64)
        cxs_chunks = []
        cys_chunks = []
        d_kind = np.empty(m, dtype=np.int32)
        d_par = np.empty(m, dtype=np.float64)
        dxs_chunks = []
        dys_chunks = []
        for k, term in enumerate(problem.terms):
            kind, scalar, xs, ys = term.coefficient.pack()
            c_kind[k] = kind
            c_val[k] = scalar
            cxs_chunks.append(xs)
            cys_chunks.append(ys)
            kind, scalar, xs, ys = term.delay.pack()
            d_kind[k] = kind
            d_par[k] = scalar
            dxs_chunks.append(xs)
            dys_chunks.append(ys)
        self.m = m
        self.c_kind = c_kind
        self.c_val = c_val
        self.c_xs, self.c_xo = _flat(cxs_chunks)
        self.c_ys, self.c_yo = _flat(cys_chunks)
        self.d_kind = d_kind
        self.d_par = d_par
        self.d_xs, self.d_xo = _flat(dxs_chunks)
        self.d_ys, self.d_yo = _flat(dys_chunks)

        h_kind, h_val, h_xs, h_ys = problem.history.pack()
        self.h_kind = h_kind
        self.h_val = h_val
        self.h_xs = _padded(h_xs)
        self.h_ys = _padded(h_ys)
        self.h_n = len(h_xs)

        f_kind, f_val, f_xs, f_ys = problem.forcing.pack()
        self.f_kind = f_kind
        self.f_val = f_val
        self.f_xs = _padded(f_xs)
        self.f_ys = _padded(f_ys)
        self.f_n = len(f_xs)


def run_mesh(
    pack: PackedProblem,
    node_t: np.ndarray,
    node_imp: np.ndarray,
    node_gain: np.ndarray,
    x0: float,
    start: float,
    linear_interp: bool,
    impl=None,
):
    """Run the stepping kernel over a prepared mesh.

    Returns (values, derivatives, left values, left derivatives), all
    aligned with ``node_t``.  ``impl`` overrides the backend module (used
    by the parity tests and the benchmark).
    """
    n = len(node_t)
    out_val = np.empty(n, dtype=np.float64)
    out_der = np.empty(n, dtype=np.float64)
    out_lval = np.empty(n, dtype=np.float64)
    out_lder = np.empty(n, dtype=np.float64)
    (impl or _impl).integrate_mesh(
        node_t,
        node_imp,
        node_gain,
        float(x0),
        float(start),
        pack.m,
        pack.c_kind,
        pack.c_val,
        pack.c_xs,
        pack.c_ys,
        pack.c_xo,
        pack.c_yo,
        pack.d_kind,
        pack.d_par,
        pack.d_xs,
        pack.d_ys,
        pack.d_xo,
        pack.d_yo,
        pack.h_kind,
        pack.h_val,
        pack.h_xs,
        pack.h_ys,
        pack.h_n,
        pack.f_kind,
        pack.f_val,
        pack.f_xs,
        pack.f_ys,
        pack.f_n,
        1 if linear_interp else 0,
        out_val,
        out_der,
        out_lval,
        out_lder,
    )
    return out_val, out_der, out_lval, out_lder
