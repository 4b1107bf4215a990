"""Build script for the optional compiled integration core.

The package works without the extension (a NumPy fallback is selected at
import time), so the build is best-effort: no Cython or no C compiler just
means a slower install.
"""

import os

from setuptools import Extension, setup

ext_modules = []
if os.environ.get("LDESC_SKIP_EXTENSION") != "1":
    try:
        from Cython.Build import cythonize
    except ImportError:
        cythonize = None
    if cythonize is not None:
        ext = Extension(
            "ldesc._kernels",
            ["src/ldesc/_kernels.pyx"],
            # -ffp-contract=off: the NumPy fallback must produce bit-identical
            # results for polynomial fields, so FMA contraction is disabled.
            extra_compile_args=["-O3", "-ffp-contract=off"],
            optional=True,
        )
        ext_modules = cythonize(
            [ext],
            compiler_directives={"language_level": "3"},
        )

setup(ext_modules=ext_modules)
