from setuptools import Extension, setup

ext_modules = []
try:
    import numpy as np
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "tvtrip._kernels._core",
                sources=["src/tvtrip/_kernels/_core.pyx"],
                include_dirs=[np.get_include()],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": "3", "boundscheck": False, "wraparound": False},
    )
except ImportError:
    # No Cython available: install pure-Python only, the kernel dispatcher
    # falls back automatically.
    ext_modules = []

setup(ext_modules=ext_modules)
