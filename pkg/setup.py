"""Build script for the optional compiled kernel backend.

The extension is a pure accelerator: if Cython or a C compiler is missing
the install still succeeds and the package falls back to the NumPy kernels
at import time.
"""

from setuptools import setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize
    from setuptools import Extension

    ext_modules = cythonize(
        [
            Extension(
                "tileprobe.kernels._ckernels",
                ["src/tileprobe/kernels/_ckernels.pyx"],
                include_dirs=[numpy.get_include()],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    pass

setup(ext_modules=ext_modules)
