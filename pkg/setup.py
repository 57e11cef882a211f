import numpy as np
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:  # the numpy fallback kernel is used instead
    ext_modules = []
else:
    ext_modules = cythonize(
        [Extension("bbgkz._kernels", ["src/bbgkz/_kernels.pyx"], include_dirs=[np.get_include()])],
        language_level=3,
    )

setup(ext_modules=ext_modules)
