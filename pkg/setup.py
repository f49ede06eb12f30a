"""Build script: compiles the optional simplex pivot kernel.

The package is pure Python by default; if Cython and a C compiler are
available, an accelerated pivot kernel is built.  A failed extension
build must never fail the install -- the pure kernel is selected at
import time when the extension is missing.
"""

import sys

from setuptools import setup
from setuptools.command.build_ext import build_ext


def extensions():
    try:
        from Cython.Build import cythonize
        from setuptools import Extension
    except ImportError:
        return []
    ext = Extension(
        "auctionlp.lp._pivot_cy",
        ["src/auctionlp/lp/_pivot_cy.pyx"],
    )
    return cythonize([ext], compiler_directives={"language_level": "3"})


class optional_build_ext(build_ext):
    """build_ext that downgrades compiler failures to a warning."""

    def run(self):
        try:
            build_ext.run(self)
        except Exception as exc:  # compiler missing or broken
            self._warn(exc)

    def build_extension(self, ext):
        try:
            build_ext.build_extension(self, ext)
        except Exception as exc:
            self._warn(exc)

    def _warn(self, exc):
        sys.stderr.write(
            "warning: building the accelerated pivot kernel failed (%s); "
            "falling back to the pure-Python kernel\n" % (exc,)
        )


setup(
    ext_modules=extensions(),
    cmdclass={"build_ext": optional_build_ext},
)
