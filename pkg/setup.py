"""Build script: compiles the optional row-reduction speedup extension.

The package works without the extension (a pure-Python twin is selected at
import time), so any build failure here is non-fatal.
"""

from setuptools import setup

ext_modules = []
try:
    from Cython.Build import cythonize
    from setuptools import Extension

    ext_modules = cythonize(
        [
            Extension(
                "imverma._kernels._speedups",
                sources=["src/imverma/_kernels/_speedups.pyx"],
                optional=True,
            )
        ],
        language_level=3,
    )
except ImportError:
    pass

setup(ext_modules=ext_modules)
