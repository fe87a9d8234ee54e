"""Build script for the compiled DP kernel.

The extension is optional: if Cython or a C compiler is unavailable the
package installs anyway and transparently falls back to the numpy kernel
(see stochuc._kernels).  Build in place for development with

    python setup.py build_ext --inplace
"""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "stochuc._kernels._core",
                ["src/stochuc/_kernels/_core.pyx"],
                extra_compile_args=["-O3"],
            )
        ],
        language_level=3,
    )
except ImportError:
    ext_modules = []

setup(ext_modules=ext_modules)
