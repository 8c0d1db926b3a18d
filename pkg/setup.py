"""Builds the optional compiled geometry kernels.

The package works without the extension (a NumPy fallback is selected at
import time), so a failed build is downgraded to a warning.
"""

import numpy as np
from setuptools import setup
from setuptools.extension import Extension

try:
    from Cython.Build import cythonize

    extensions = cythonize(
        [
            Extension(
                "pcsim.geom._kernels_c",
                ["src/pcsim/geom/_kernels_c.pyx"],
                include_dirs=[np.get_include()],
                extra_compile_args=["-O3"],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        language_level=3,
    )
except ImportError:
    print("Cython not available; installing with the pure NumPy kernel backend.")
    extensions = []

setup(ext_modules=extensions)
