from setuptools import setup, Extension

try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "mapchaos._core",
                ["src/mapchaos/_core.pyx"],
                extra_compile_args=["-O3"],
            )
        ],
        language_level=3,
    )
except ImportError:
    # No Cython available: install without the compiled core; the package
    # falls back to the pure-Python kernels at import time.
    ext_modules = []

setup(ext_modules=ext_modules)
