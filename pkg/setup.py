import os

from setuptools import Extension, setup


def extensions():
    """Build the compiled simulator kernel when Cython is available.

    The package works without it (a numpy fallback is selected at import
    time), so a missing compiler toolchain only costs speed. Set
    WPBFT_SKIP_EXT=1 to force a pure-Python install.
    """
    if os.environ.get("WPBFT_SKIP_EXT") == "1":
        return []
    try:
        from Cython.Build import cythonize
    except ImportError:
        return []
    ext = Extension(
        "wpbft.simulator._kernel",
        ["src/wpbft/simulator/_kernel.pyx"],
    )
    return cythonize([ext], language_level=3)


setup(ext_modules=extensions())
