"""Build script for the compiled Viterbi kernel.

The extension is optional at runtime: jamcomp.viterbi falls back to a
vectorised numpy kernel when the compiled module is absent, so a failed
build leaves a slower but fully functional package.
"""

from setuptools import Extension, setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "jamcomp._viterbi_cy",
                ["src/jamcomp/_viterbi_cy.pyx"],
                include_dirs=[numpy.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        compiler_directives={
            "language_level": 3,
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
            "initializedcheck": False,
            "nonecheck": False,
            "embedsignature": True,
        },
    )
except ImportError:
    pass

setup(ext_modules=ext_modules)
