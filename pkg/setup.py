"""Build script: compiles the optional C kernel when Cython is available.

The package is fully functional without the extension; eigenkit._backend
falls back to the pure-Python kernel at import time.
"""

from setuptools import setup

ext_modules = []
try:
    from Cython.Build import cythonize
    from setuptools import Extension

    ext_modules = cythonize(
        [
            Extension(
                "eigenkit._ckernel",
                ["src/eigenkit/_ckernel.pyx"],
                extra_compile_args=["-O2"],
            )
        ],
        language_level=3,
    )
except Exception as exc:  # pragma: no cover - build-env dependent
    print(f"eigenkit: building without C kernel ({exc})")

setup(ext_modules=ext_modules)
