"""Build script for the optional compiled walk kernels."""

import os

import numpy
from setuptools import setup
from setuptools.extension import Extension

ext_modules = []
if os.environ.get("HITRUN_NO_EXTENSION", "") in ("", "0"):
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "hitrun._kernels",
                ["src/hitrun/_kernels.pyx"],
                include_dirs=[numpy.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": 3},
    )

setup(ext_modules=ext_modules)
