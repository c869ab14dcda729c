"""Build script for the optional compiled eigensolver core.

The package is fully functional without the extension; the pure NumPy
kernels in mesondyn.linalg._kernels_py are used whenever the compiled
module is missing. Set MESONDYN_PURE=1 to skip the build entirely.
"""
import os

from setuptools import Extension, setup

ext_modules = []
if os.environ.get("MESONDYN_PURE", "0") != "1":
    try:
        import numpy
        from Cython.Build import cythonize

        ext = Extension(
            "mesondyn.linalg._core",
            sources=["src/mesondyn/linalg/_core.pyx"],
            include_dirs=[numpy.get_include()],
            define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            extra_compile_args=["-O3"],
            optional=True,
        )
        ext_modules = cythonize(
            [ext],
            compiler_directives={
                "language_level": 3,
                "boundscheck": False,
                "wraparound": False,
                "cdivision": True,
            },
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
