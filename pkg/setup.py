#!/usr/bin/env python3
"""
HRC Setup Script

Setup script for the hierarchical risk-averse control toolkit.
"""

from setuptools import setup, find_packages

# Read the README file
def read_readme():
    with open("README.md", "r", encoding="utf-8") as fh:
        return fh.read()

# Read requirements (runtime only; test tooling goes to extras)
def read_requirements():
    with open("requirements.txt", "r", encoding="utf-8") as fh:
        lines = [line.split("#")[0].strip() for line in fh]
    return [line for line in lines if line and not line.startswith("pytest")]

setup(
    name="hrc",
    version="1.0.0",
    description="Hierarchical risk-averse control: g-expectation BSDEs and leader/follower HJB solvers",
    long_description=read_readme(),
    long_description_content_type="text/markdown",
    packages=find_packages(where="src"),
    package_dir={"": "src"},
    classifiers=[
        "Development Status :: 4 - Beta",
        "Intended Audience :: Science/Research",
        "Topic :: Scientific/Engineering :: Mathematics",
        "License :: OSI Approved :: MIT License",
        "Programming Language :: Python :: 3",
        "Programming Language :: Python :: 3.9",
        "Programming Language :: Python :: 3.10",
        "Programming Language :: Python :: 3.11",
        "Operating System :: OS Independent",
    ],
    python_requires=">=3.9",
    install_requires=read_requirements(),
    extras_require={
        "dev": [
            "pytest>=7.4.3",
            "pytest-cov>=4.1.0",
        ],
    },
    entry_points={
        "console_scripts": [
            "hrc=hrc.cli:main",
        ],
    },
    include_package_data=True,
    keywords=[
        "stochastic control",
        "BSDE",
        "g-expectation",
        "risk measures",
        "Stackelberg games",
        "HJB equations",
        "Monte Carlo",
    ],
    zip_safe=False,
)
