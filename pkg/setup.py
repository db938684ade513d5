import os

from setuptools import Extension, setup

ext_modules = []
if not os.environ.get("NETLOC_NO_EXT"):
    try:
        import numpy as np
        from Cython.Build import cythonize
    except ImportError:  # fall back to the pure-Python kernels
        pass
    else:
        ext_modules = cythonize(
            [
                Extension(
                    "netloc._kernels._ckernels",
                    ["src/netloc/_kernels/_ckernels.pyx"],
                    include_dirs=[np.get_include()],
                    extra_compile_args=["-O3"],
                )
            ],
            compiler_directives={"language_level": "3"},
        )

setup(ext_modules=ext_modules)
