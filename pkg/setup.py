"""Build script for the optional compiled kernels.

The Cython extension is a speed-up only.  If Cython is missing or the C
compiler fails, the package installs without it and falls back to the
pure-Python kernels at import time.
"""
import warnings

from setuptools import setup
from setuptools.command.build_ext import build_ext
from setuptools.extension import Extension

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None


class OptionalBuildExt(build_ext):
    def run(self):
        try:
            super().run()
        except Exception as exc:  # noqa: BLE001
            warnings.warn(f"compiled kernels not built ({exc}); using pure Python")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:  # noqa: BLE001
            warnings.warn(f"building {ext.name} failed ({exc}); using pure Python")


if cythonize is not None:
    ext_modules = cythonize(
        [Extension("wpcn._ckernels", ["src/wpcn/_ckernels.pyx"])],
        compiler_directives={"language_level": 3},
    )
else:
    ext_modules = []

setup(ext_modules=ext_modules, cmdclass={"build_ext": OptionalBuildExt})
