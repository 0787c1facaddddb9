import os

from setuptools import Extension, setup

ext_modules = []
if os.environ.get("PROSIGN_NO_EXT") != "1":
    try:
        import numpy
        from Cython.Build import cythonize

        ext_modules = cythonize(
            [
                Extension(
                    "prosign._accel",
                    ["src/prosign/_accel.pyx"],
                    include_dirs=[numpy.get_include()],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                    extra_compile_args=["-O3"],
                )
            ],
            language_level=3,
        )
    except Exception:
        # No Cython toolchain: install pure-Python; prosign.kernels falls back
        # to the NumPy reference implementation at import time.
        ext_modules = []

setup(ext_modules=ext_modules)
