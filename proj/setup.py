import subprocess

from pybind11.setup_helpers import Pybind11Extension, build_ext
from setuptools import setup

SOURCES = [
    "bindings/module.cpp",
    "src/network.cpp",
    "src/plant.cpp",
    "src/qp.cpp",
    "src/layered.cpp",
    "src/mpc.cpp",
    "src/regional.cpp",
    "src/sim.cpp",
    "src/scenario.cpp",
]


def eigen_includes():
    try:
        out = subprocess.check_output(
            ["pkg-config", "--cflags-only-I", "eigen3"], text=True)
        return [flag[2:] for flag in out.split() if flag.startswith("-I")]
    except Exception:
        return ["/usr/include/eigen3", "/usr/local/include/eigen3"]


ext = Pybind11Extension(
    "gridfreq._core",
    SOURCES,
    include_dirs=["include", "vendor"] + eigen_includes(),
    cxx_std=20,
)

setup(ext_modules=[ext], cmdclass={"build_ext": build_ext})
