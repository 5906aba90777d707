import os

from setuptools import Extension, setup

ext_modules = []
if os.environ.get("STREAMCKPT_NO_EXT", "") != "1":
    try:
        from Cython.Build import cythonize
    except ImportError:
        pass
    else:
        ext_modules = cythonize(
            [Extension("streamckpt._core", ["src/streamckpt/_core.pyx"])],
            language_level=3,
        )

setup(ext_modules=ext_modules)
