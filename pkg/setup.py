import os

from setuptools import Extension, setup

ext_modules = []
if os.environ.get("SSPACE_NO_EXT") != "1":
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "sspace._dp_core",
                ["src/sspace/_dp_core.pyx"],
                # the kernel relies on plain IEEE binary64 rounding
                extra_compile_args=["-O3", "-ffp-contract=off", "-fno-fast-math"],
            )
        ],
        compiler_directives={"language_level": 3},
    )

setup(ext_modules=ext_modules)
