from setuptools import setup

with open("README.md", "r") as fh:
    long_description = fh.read()

setup (
    name='colonyroute',
    version='0.1.0',
    description='Time-window aware ant colony route planning for logistics robots on occupancy grids, with baseline planners and a benchmark harness.',
    packages=['colonyroute'],
    package_dir={'colonyroute': 'src'},
    install_requires=["numpy>=1.22", "scipy>=1.8"],
    extras_require={"test": ["pytest"]},
    entry_points={"console_scripts": ["colonyroute=colonyroute.bench:main"]},
    python_requires=">=3.8",
    long_description=long_description,
    long_description_content_type="text/markdown",
    classifiers=[
        "Programming Language :: Python :: 3",
        "Programming Language :: Python :: 3.8",
        "Programming Language :: Python :: 3.9",
        "Programming Language :: Python :: 3.10",
        "License :: OSI Approved :: MIT License",
        "Operating System :: OS Independent",
    ],
)
