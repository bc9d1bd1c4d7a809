import numpy as np
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:  # pure-Python install; halfline.kernels falls back to NumPy
    ext_modules = []
else:
    ext_modules = cythonize(
        [Extension("halfline._kernels", ["src/halfline/_kernels.pyx"],
                   include_dirs=[np.get_include()])],
        language_level=3,
    )

setup(ext_modules=ext_modules)
