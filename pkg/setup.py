"""Build script: compiles the optional Cython core.

The package works without the extension (a NumPy fallback is selected at
import time), so a failed extension build degrades gracefully to a
pure-Python install.
"""

from setuptools import setup

ext_modules = []
try:
    import numpy as np
    from Cython.Build import cythonize
    from setuptools import Extension

    ext_modules = cythonize(
        [
            Extension(
                "polyblob._kernels",
                ["src/polyblob/_kernels.pyx", "src/polyblob/_kernels_impl.c"],
                depends=["src/polyblob/_kernels_impl.h"],
                include_dirs=[np.get_include(), "src/polyblob"],
                extra_compile_args=["-O3", "-ffast-math", "-march=native", "-fno-wrapv", "-fopenmp"],
                extra_link_args=["-fopenmp"],
                libraries=["mvec", "m"],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    pass

setup(ext_modules=ext_modules)
