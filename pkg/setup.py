from Cython.Build import cythonize
from setuptools import Extension, setup

# optional=True: a failed compile leaves the pure-numpy kernels in charge.
extensions = [
    Extension(
        "faceprobe._ckernels",
        ["src/faceprobe/_ckernels.pyx"],
        extra_compile_args=["-O3"],
        optional=True,
    )
]

setup(
    ext_modules=cythonize(
        extensions,
        compiler_directives={"language_level": "3"},
    )
)
