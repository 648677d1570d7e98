"""Build script for the optional compiled kernels.

The package is fully functional without the extension (a NumPy fallback is
selected at import time), so a failed compile downgrades to a warning instead
of aborting the install. Set HAMMRL_SKIP_EXT=1 to skip the extension build
entirely.
"""

import os
import warnings

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None


class OptionalBuildExt(build_ext):
    """build_ext that treats compile failures as non-fatal."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # toolchain missing entirely
            self._skip(exc)

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            self._skip(exc)

    @staticmethod
    def _skip(exc):
        warnings.warn(
            f"compiled kernels not built ({exc}); "
            "the pure NumPy backend will be used"
        )


if os.environ.get("HAMMRL_SKIP_EXT") == "1" or cythonize is None:
    extensions = []
else:
    extensions = cythonize(
        [
            Extension(
                "hammrl._kernels",
                ["src/hammrl/_kernels.pyx"],
                extra_compile_args=["-O3"],
            )
        ],
        language_level=3,
    )

setup(ext_modules=extensions, cmdclass={"build_ext": OptionalBuildExt})
