from setuptools import setup, find_packages

setup(
    name="ras-scopf-toolkit",
    version="0.1.0",
    packages=find_packages(exclude=["tests", "tests.*", "examples", "examples.*"]),
    description="Remedial action scheme design with RAS-SCOPF, benchmark formulations and cascade simulation",
    long_description=open("README.md").read(),
    long_description_content_type="text/markdown",
    classifiers=[
        "Development Status :: 3 - Alpha",
        "Intended Audience :: Science/Research",
        "License :: OSI Approved :: MIT License",
        "Programming Language :: Python :: 3",
        "Programming Language :: Python :: 3.8",
        "Programming Language :: Python :: 3.9",
        "Programming Language :: Python :: 3.10",
        "Programming Language :: Python :: 3.11",
        "Topic :: Scientific/Engineering",
    ],
    install_requires=[
        "numpy",
        "scipy>=1.9",
        "cvxpy>=1.3",
        "networkx",
        "pandas",
        "PyYAML",
    ],
    extras_require={"test": ["pytest"]},
    entry_points={"console_scripts": ["ras-scopf=ras_scopf.experiments.cli:main"]},
    python_requires=">=3.8",
)
