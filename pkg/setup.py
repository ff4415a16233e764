"""Build script for the optional compiled neighbor-search kernel.

The package is fully functional without the extension; the pure-Python
backend is selected automatically at import when the compiled module is
missing.  -ffp-contract=off keeps the C kernel bit-identical to the
NumPy backend (no FMA contraction of dlat*dlat + dlon*dlon).
"""

from setuptools import Extension, setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize

    extensions = [
        Extension(
            "sealanes.clustering._neighbors_cy",
            ["src/sealanes/clustering/_neighbors_cy.pyx"],
            include_dirs=[numpy.get_include()],
            define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            extra_compile_args=["-O3", "-ffp-contract=off"],
        )
    ]
    ext_modules = cythonize(extensions, compiler_directives={"language_level": "3"})
    for ext in ext_modules:
        ext.optional = True
except ImportError:
    pass

setup(ext_modules=ext_modules)
