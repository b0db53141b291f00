"""Build script: compiles the pairwise-kernel extension when Cython and a C
compiler are available.  The package works without it (pure-numpy fallback
selected at import, see varioscreen.kernels)."""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None


def extensions():
    if cythonize is None:
        return []
    import numpy as np

    ext = Extension(
        "varioscreen._fastpath",
        ["src/varioscreen/_fastpath.pyx"],
        include_dirs=[np.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        # -ffp-contract=off: keep float ops bit-identical to the numpy fallback
        extra_compile_args=["-O3", "-ffp-contract=off"],
    )
    return cythonize([ext], compiler_directives={"language_level": "3"})


setup(ext_modules=extensions())
