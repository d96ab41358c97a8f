"""Build script: compiles the optional Cython split-scan kernel.

The package works without the extension (a NumPy fallback is selected at
import time); the build is therefore marked optional so a missing compiler
never blocks installation.
"""
from setuptools import Extension, setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "offlang._kernels._split_cy",
                ["src/offlang/_kernels/_split_cy.pyx"],
                include_dirs=[numpy.get_include()],
                extra_compile_args=["-O2"],
                optional=True,
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    pass

setup(ext_modules=ext_modules)
