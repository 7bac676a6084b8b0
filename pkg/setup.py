"""Optional compiled kernels; the package falls back to pure Python without them."""

import os

from setuptools import setup
from setuptools.command.build_ext import build_ext


class OptionalBuildExt(build_ext):
    def run(self):
        try:
            super().run()
        except Exception as exc:  # compiler or headers missing
            print(f"warning: compiled kernels not built ({exc}); using pure Python")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            print(f"warning: {ext.name} not built ({exc}); using pure Python")


def _extensions():
    if os.environ.get("PRILL_PURE_PYTHON", "").lower() in ("1", "true", "yes"):
        return []
    try:
        import gmpy2
        from Cython.Build import cythonize
        from setuptools import Extension
    except ImportError:
        return []
    inc = os.path.dirname(gmpy2.__file__)
    bundled = os.path.join(os.path.dirname(inc), "gmpy2.libs")
    link, libs = [], []
    if os.path.isdir(bundled):
        # wheels ship their own gmp/mpfr/mpc; link those so gmpy2 objects are layout-compatible
        link = [os.path.join(bundled, n) for n in sorted(os.listdir(bundled))]
        link.append("-Wl,-rpath," + bundled)
    else:
        libs = ["mpc", "mpfr", "gmp"]
    ext = Extension(
        "prill.numeric._kernels",
        ["src/prill/numeric/_kernels.pyx"],
        include_dirs=[inc],
        libraries=libs,
        extra_link_args=link,
    )
    return cythonize([ext], compiler_directives={"language_level": 3})


setup(ext_modules=_extensions(), cmdclass={"build_ext": OptionalBuildExt})
