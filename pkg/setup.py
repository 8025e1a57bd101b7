"""Build script: compiles the optional Cython kernel extension.

The package works without the extension (a NumPy fallback is selected at
import time), so a failed compile only costs speed.  Build in place with:

    python setup.py build_ext --inplace

Set CORRMMSE_PURE=1 to skip the extension entirely.
"""

import os

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None


class optional_build_ext(build_ext):
    """Degrade to the pure-Python backend when compilation fails."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # compiler missing, etc.
            print(f"warning: kernel extension not built ({exc}); "
                  "falling back to the NumPy backend")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            print(f"warning: {ext.name} failed to compile ({exc}); "
                  "falling back to the NumPy backend")


extensions = []
if cythonize is not None and not os.environ.get("CORRMMSE_PURE"):
    extensions = cythonize(
        [
            Extension(
                "corrmmse.numerics._kernels",
                sources=["src/corrmmse/numerics/_kernels.pyx"],
            )
        ],
        compiler_directives={
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
            "initializedcheck": False,
            "language_level": "3",
        },
    )

setup(
    ext_modules=extensions,
    cmdclass={"build_ext": optional_build_ext},
)
