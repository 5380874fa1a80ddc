import os

from pkg_resources import parse_requirements
from setuptools import find_packages, setup

_PATH_ROOT = os.path.dirname(__file__)


def _load_requirements(path_dir: str, file_name: str = "requirements.txt") -> list:
    reqs = parse_requirements(open(os.path.join(path_dir, file_name)).readlines())
    return list(map(str, reqs))


setup(
    name="bureskit",
    packages=find_packages(exclude=["tests"]),
    version="0.1.0",
    description="Explicit, diagonalization-free evaluation of the Bures metric on positive density matrices.",
    long_description=open("README.md", "r", encoding="utf-8").read(),
    long_description_content_type="text/markdown",
    keywords=["bures metric", "density matrix", "sylvester equation", "quantum information"],
    classifiers=[],
    license="MIT",
    entry_points={"console_scripts": ["bureskit=bureskit.cli:bureskit_cli"]},
    python_requires=">=3.8",
    include_package_data=True,
    install_requires=_load_requirements(_PATH_ROOT),
    extras_require={"test": ["pytest"]},
)
