"""
Setup script for bonecloth with optional Cython compilation.

The numeric hot paths (tape ops, UV tables, graph assembly) can be built
as compiled extensions. Everything else, including the public API
(cli.py, config.py, errors.py, metrics.py, types.py), ships as source.
"""

from setuptools import setup, find_packages, Extension
import os

# Check if Cython is available
try:
    from Cython.Build import cythonize
    USE_CYTHON = True
except ImportError:
    USE_CYTHON = False
    print("Cython not found. Building without compilation (source only).")

# Internal modules to compile with Cython
CYTHON_MODULES = [
    "src/bonecloth/_diffcore/ops.py",
    "src/bonecloth/_diffcore/tape.py",
    "src/bonecloth/_geometry/uv.py",
    "src/bonecloth/_networks/graph.py",
]


def get_extensions():
    """Build Extension objects for Cython compilation."""
    if not USE_CYTHON:
        return []

    extensions = []
    for module_path in CYTHON_MODULES:
        if os.path.exists(module_path):
            # src/bonecloth/_diffcore/ops.py -> bonecloth._diffcore.ops
            module_name = module_path.replace("src/", "").replace("/", ".").replace(".py", "")
            extensions.append(Extension(name=module_name, sources=[module_path]))
    return extensions


def get_ext_modules():
    """Get extension modules, cythonized if Cython is available."""
    extensions = get_extensions()
    if not extensions:
        return []

    return cythonize(
        extensions,
        compiler_directives={
            "language_level": "3",
            "boundscheck": False,
            "wraparound": True,
        },
        nthreads=os.cpu_count() or 1,
    )


ext_modules = get_ext_modules() if USE_CYTHON else []

setup(
    name="bonecloth",
    version="1.0.0",
    description="Bone-driven neural garment simulation",
    python_requires=">=3.10",
    packages=find_packages(where="src"),
    package_dir={"": "src"},
    ext_modules=ext_modules,
    install_requires=[
        "numpy>=1.24",
        "scipy>=1.10",
        "pydantic>=2.5.0",
    ],
    extras_require={
        "dev": ["pytest>=7.4", "cython>=3.0", "build", "wheel"],
    },
    entry_points={"console_scripts": ["bonecloth = bonecloth.cli:main"]},
    package_data={"bonecloth": ["*.so", "*.pyd"]},
)
