import numpy as np
from Cython.Build import cythonize
from setuptools import Extension, setup

# The compiled kernels are optional: if the build fails (no compiler), the
# package falls back to the pure-numpy backend at import time.
extensions = [
    Extension(
        "radiotwin.kernels._native",
        ["src/radiotwin/kernels/_native.pyx"],
        include_dirs=[np.get_include()],
        extra_compile_args=["-O3"],
        optional=True,
    )
]

setup(
    ext_modules=cythonize(
        extensions,
        compiler_directives={"language_level": "3"},
    )
)
