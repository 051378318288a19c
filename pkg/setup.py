import numpy as np
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

if cythonize is not None:
    ext_modules = cythonize(
        [
            Extension(
                "impulse_stab._core",
                ["src/impulse_stab/_core.pyx"],
                include_dirs=[np.get_include()],
            )
        ],
        language_level="3",
    )
else:
    # Source distribution without Cython: the package falls back to the
    # pure-Python kernel at import time.
    ext_modules = []

setup(ext_modules=ext_modules)
