"""Build script for the optional compiled scoring kernels.

The package works without the extension: scisearch.kernels falls back to
the pure-Python implementation when the compiled module is unavailable.
"""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    extensions = cythonize(
        [Extension("scisearch._scoring", ["src/scisearch/_scoring.pyx"])],
        language_level=3,
    )
except ImportError:
    extensions = []

setup(ext_modules=extensions)
