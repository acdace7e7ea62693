from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    extensions = cythonize(
        [
            Extension(
                "parcell._core._kernel",
                ["src/parcell/_core/_kernel.pyx"],
                optional=True,
            )
        ],
        compiler_directives={
            "language_level": "3",
            "boundscheck": False,
            "wraparound": False,
        },
    )
except ImportError:
    # No Cython available: install pure-Python only, the package falls back
    # to parcell._core.fallback at import time.
    extensions = []

setup(ext_modules=extensions)
