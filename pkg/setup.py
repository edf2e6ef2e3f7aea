"""Build script for the compiled series kernel.

The package works without the extension (a numpy fallback is selected at
import time), but the compiled kernel is considerably faster for the
10k-mode zonal series sums that dominate the convergence studies.
"""

import numpy
from setuptools import Extension, setup
from Cython.Build import cythonize

ext = Extension(
    "fracsurf._zonal",
    ["src/fracsurf/_zonal.pyx"],
    include_dirs=[numpy.get_include()],
    # -ffp-contract=off keeps the compiled kernel bit-compatible with the
    # numpy fallback (no FMA contraction of a*b+c).
    extra_compile_args=["-O3", "-ffp-contract=off"],
    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
)

setup(ext_modules=cythonize([ext], language_level=3))
