"""Build script: compiles the optional Cython kernel core.

The package is fully functional without the extension; `repose.kernels`
falls back to the pure-numpy implementations when `_core` is missing or
when REPOSE_PURE_PYTHON=1 is set.
"""

import os

from setuptools import setup

ext_modules = []
if os.environ.get("REPOSE_SKIP_EXT") != "1":
    try:
        import numpy as np
        from Cython.Build import cythonize
        from setuptools import Extension

        ext_modules = cythonize(
            [
                Extension(
                    "repose.kernels._core",
                    ["src/repose/kernels/_core.pyx"],
                    include_dirs=[np.get_include()],
                    extra_compile_args=["-O3"],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                )
            ],
            compiler_directives={"language_level": "3"},
        )
    except ImportError:
        print("Cython or numpy unavailable; building without the compiled kernel core")

setup(ext_modules=ext_modules)
