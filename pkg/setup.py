"""Build script for the compiled kernels.

The extension is optional: if Cython or a compiler is unavailable the package
falls back to ``mesonloop._kernels_py`` at import time.

    pip install -e . --no-build-isolation
"""
import numpy as np
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:  # pragma: no cover
    ext_modules = []
else:
    ext_modules = cythonize(
        [
            Extension(
                "mesonloop._kernels",
                ["src/mesonloop/_kernels.pyx"],
                include_dirs=[np.get_include()],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)
