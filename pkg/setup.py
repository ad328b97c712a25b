"""Build script for the optional compiled kernel backend.

The package is pure Python plus one optional Cython extension with the hot
mesh kernels.  When Cython or a C compiler is unavailable the extension is
simply skipped and the numpy fallback backend is used at runtime.
"""

from setuptools import Extension, setup


def _extensions():
    import os

    if not os.path.exists("src/helfrich_lab/_kernels/_fast.pyx"):
        return []
    try:
        import numpy
        from Cython.Build import cythonize
    except ImportError:
        return []
    ext = Extension(
        "helfrich_lab._kernels._fast",
        sources=["src/helfrich_lab/_kernels/_fast.pyx"],
        include_dirs=[numpy.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        extra_compile_args=["-O3"],
    )
    return cythonize([ext], language_level=3)


setup(ext_modules=_extensions())
