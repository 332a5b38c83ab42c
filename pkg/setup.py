#!/usr/bin/env python3

from setuptools import setup, find_packages

setup(
    name="omega_synth",
    version="0.1.0",
    description="Parity-game based reactive synthesis of AIGER controllers",
    author="omega-synth developers",
    author_email="info@example.com",
    package_dir={"": "src"},
    packages=find_packages(where="src"),
    install_requires=[
        "numpy>=1.19.0",
        "pillow>=8.0.0",
        "networkx>=2.5",
    ],
    entry_points={
        "console_scripts": [
            "omega-synth=omega_synth.cli:main",
        ],
    },
    classifiers=[
        "Development Status :: 3 - Alpha",
        "Intended Audience :: Science/Research",
        "License :: OSI Approved :: MIT License",
        "Programming Language :: Python :: 3",
        "Programming Language :: Python :: 3.8",
        "Programming Language :: Python :: 3.9",
        "Programming Language :: Python :: 3.10",
    ],
    python_requires=">=3.8",
)
