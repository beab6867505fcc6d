from setuptools import Extension, setup
from Cython.Build import cythonize

ext = Extension(
    "dialectid.kernels._convext",
    ["src/dialectid/kernels/_convext.pyx"],
)

setup(ext_modules=cythonize([ext], language_level=3))
