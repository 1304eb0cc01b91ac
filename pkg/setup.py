"""Build script: compiles the trajectory kernel when Cython and a C
toolchain are available; the package falls back to the pure-Python kernel
otherwise, so the extension is strictly optional."""

from setuptools import setup

try:
    from Cython.Build import cythonize

    # fp-contract off: the compiled kernel must be bit-identical to the
    # pure-Python twin, so no FMA fusion is allowed.
    ext_modules = cythonize(
        [
            "src/fairdyn/_loops_c.pyx",
        ],
        language_level="3",
    )
    for ext in ext_modules:
        ext.extra_compile_args = ["-O2", "-ffp-contract=off"]
except ImportError:
    ext_modules = []

setup(ext_modules=ext_modules)
