from setuptools import setup, find_packages

setup(
    name="bpsprimes",
    version="0.1.0",
    description="Primes in Beatty and Piatetski-Shapiro sequence intersections",
    packages=find_packages(exclude=("tests",)),
    python_requires=">=3.9",
    install_requires=[
        "numpy>=1.24.0",
        "mpmath>=1.3.0",
    ],
    extras_require={"test": ["pytest>=7.0"]},
    entry_points={
        "console_scripts": [
            "bpsprimes=bpsprimes.cli:main",
        ],
    },
)
