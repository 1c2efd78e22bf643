"""Build script: compiles the optional Cython kernel module.

The package is fully functional without the extension (a numpy fallback is
selected at import time), so any failure here is downgraded to a warning and
the build proceeds pure-Python.
"""

import warnings

from setuptools import Extension, setup


def _extensions():
    try:
        from Cython.Build import cythonize
    except ImportError:
        warnings.warn("Cython unavailable; building without compiled kernels")
        return []
    ext = Extension(
        "vldsrc._cutoffcore",
        ["src/vldsrc/_cutoffcore.pyx"],
        extra_compile_args=["-O3"],
    )
    return cythonize(
        [ext],
        compiler_directives={
            "language_level": 3,
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
        },
    )


try:
    setup(ext_modules=_extensions())
except SystemExit:
    raise
except Exception as exc:  # compiler missing, etc. — never a hard failure
    warnings.warn(f"Extension build failed ({exc}); retrying pure-Python")
    setup(ext_modules=[])
