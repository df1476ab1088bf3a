"""Build script for the optional compiled kernel backend.

The package is fully functional without the extension (a NumPy fallback is
selected at import time), so a failed compile must never break the install.
"""

import numpy
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None


def extensions():
    if cythonize is None:
        return []
    ext = Extension(
        "polyforge.kernels._core",
        ["src/polyforge/kernels/_core.pyx"],
        include_dirs=[numpy.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        extra_compile_args=["-O3"],
    )
    return cythonize([ext], language_level=3)


try:
    setup(ext_modules=extensions())
except SystemExit:
    # Retry as a pure-Python install; the runtime falls back to NumPy kernels.
    setup(ext_modules=[])
