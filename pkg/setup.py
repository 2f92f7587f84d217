import os

import numpy
import scipy
from setuptools import Extension, setup

# The compiled kernels are optional: the package falls back to the numpy
# implementation when the extension is absent (GIBBSBOUND_NO_EXT=1 skips the
# build entirely).
if os.environ.get("GIBBSBOUND_NO_EXT"):
    ext_modules = []
else:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "gibbsbound.kernels._native",
                ["src/gibbsbound/kernels/_native.pyx"],
                include_dirs=[numpy.get_include()],
                extra_compile_args=["-O3", "-march=native", "-funroll-loops"],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)
