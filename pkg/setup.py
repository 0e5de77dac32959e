"""Build script for the optional compiled integration kernel.

The package works without the extension (a NumPy fallback is selected at
import time), so a failed build only costs speed, not functionality.
"""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    extensions = cythonize(
        [
            Extension(
                "isinglink._kernel",
                ["src/isinglink/_kernel.pyx"],
                extra_compile_args=["-O3"],
            )
        ],
        language_level=3,
    )
except ImportError:
    extensions = []

setup(ext_modules=extensions)
