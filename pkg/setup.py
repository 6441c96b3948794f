import os

import numpy
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

ext_modules = []
if cythonize is not None and os.path.exists("src/oic360/kernels/_bp_c.pyx"):
    ext_modules = cythonize(
        [
            Extension(
                "oic360.kernels._bp_c",
                ["src/oic360/kernels/_bp_c.pyx"],
                include_dirs=[numpy.get_include()],
            )
        ],
        language_level=3,
    )

# The compiled kernel is optional: the package falls back to the numpy
# implementation in oic360.kernels._bp_py when the extension is missing.
setup(ext_modules=ext_modules)
