import os

from setuptools import Extension, setup

# The compiled kernels are an optional speedup; the package falls back to
# the pure-Python implementations when the extension is absent.
ext_modules = []
if not os.environ.get("LADYBUG_NO_EXT"):
    try:
        from Cython.Build import cythonize

        ext_modules = cythonize(
            [
                Extension(
                    "ladybug._kernels._speedups",
                    ["src/ladybug/_kernels/_speedups.pyx"],
                    optional=True,
                )
            ],
            compiler_directives={"language_level": 3},
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
