import numpy
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
    exts = cythonize(
        [Extension("capfilm._ext.ckernels", ["src/capfilm/_ext/ckernels.pyx"],
                   include_dirs=[numpy.get_include()])],
        language_level=3,
    )
except ImportError:
    exts = []

setup(ext_modules=exts)
