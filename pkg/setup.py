from setuptools import setup, find_packages

setup(
    name='pyspl',
    version='0.1.0',
    description=("Spectral minimal partitions: partition Laplacian, nodal deficiency "
                 "and shape Hessians on rectangles and disks"),
    license="MIT",
    keywords="spectral partitions eigenvalues nodal domains shape derivative",
    packages=find_packages(exclude=["tests"]),
    python_requires='>=3.8',
    install_requires=[
        'click',
        'pyyaml',
        'numpy',
        'scipy',
        'networkx',
    ],
    extras_require={
        'test': ['pytest'],
    },
    entry_points='''
        [console_scripts]
        pyspl=pyspl.cli:cli
    ''',
)
