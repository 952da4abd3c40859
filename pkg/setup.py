"""Build glue for the optional compiled kernel backend.

The package is pure Python plus one optional Cython extension holding the
Monte Carlo hot loops. If Cython, numpy headers, or a C compiler are missing
the build quietly falls back to the pure-Python twin; nothing else changes.
"""

import os

from setuptools import setup


def _kernel_extension():
    try:
        import numpy
        from Cython.Build import cythonize
        from setuptools import Extension
    except ImportError:
        return []
    randlib = os.path.join(os.path.dirname(numpy.random.__file__), "lib")
    ext = Extension(
        "mcmc_certify._kernels._cy",
        ["src/mcmc_certify/_kernels/_cy.pyx"],
        include_dirs=[numpy.get_include()],
        library_dirs=[randlib],
        libraries=["npyrandom"],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        # no FP contraction: branch decisions must match the pure-Python
        # backend bit for bit
        extra_compile_args=["-O2", "-ffp-contract=off"],
    )
    return cythonize([ext], language_level="3")


try:
    setup(ext_modules=_kernel_extension())
except BaseException:
    # compiler missing or broken: install the pure-Python fallback
    setup(ext_modules=[])
