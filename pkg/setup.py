"""Build script: compiles the optional sieve kernel when Cython and a C
compiler are available, and falls back to the pure-numpy implementation
otherwise.  `pip install -e . --no-build-isolation` works either way."""

import os

from setuptools import setup

ext_modules = []
if os.environ.get("DIGITPRIMES_NO_EXT") != "1":
    try:
        from Cython.Build import cythonize
        from setuptools import Extension

        ext_modules = cythonize(
            [Extension("digitprimes._sievekernel", ["src/digitprimes/_sievekernel.pyx"])],
            compiler_directives={"language_level": "3"},
        )
    except ImportError:
        pass


if ext_modules:
    from setuptools.command.build_ext import build_ext
    from distutils.errors import CCompilerError, DistutilsExecError, DistutilsPlatformError

    class optional_build_ext(build_ext):
        """Swallow compiler failures; the package runs on the numpy path."""

        def run(self):
            try:
                build_ext.run(self)
            except (DistutilsPlatformError, FileNotFoundError):
                self.extensions = []

        def build_extension(self, ext):
            try:
                build_ext.build_extension(self, ext)
            except (CCompilerError, DistutilsExecError, DistutilsPlatformError, ValueError):
                pass

    setup(ext_modules=ext_modules, cmdclass={"build_ext": optional_build_ext})
else:
    setup()
