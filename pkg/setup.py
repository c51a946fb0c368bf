from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:  # build without the compiled kernel
    ext_modules = []
else:
    ext_modules = cythonize(
        [
            Extension(
                "vspace._cmodexp",
                ["src/vspace/_cmodexp.pyx"],
                include_dirs=["src/vspace"],
                extra_compile_args=["-O3"],
                optional=True,
            )
        ],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)
