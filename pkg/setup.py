from setuptools import setup, find_packages

VERSION = '0.1.0'
DESCRIPTION = 'Effective capacity and energy efficiency of finite-blocklength URLLC links.'
LONG_DESCRIPTION = ('urllctoolkit is a Python package that evaluates, cross-checks and optimizes '
                    'the effective capacity and effective energy efficiency of short-packet '
                    'links over Nakagami-m fading, including empty-buffer-aware power models '
                    'and a buffer-aware single-retransmission scheme.')

# Setting up
setup(
        name="urllctoolkit",
        version=VERSION,
        description=DESCRIPTION,
        long_description=LONG_DESCRIPTION,
        packages=find_packages(exclude=['tests']),
        python_requires='>=3.9',
        install_requires=['numpy', 'scipy', 'pandas>=1.5'],
        extras_require={'tests': ['pytest', 'hypothesis']},
        entry_points={'console_scripts': ['urllctoolkit=urllctoolkit.cli:main']},
        keywords=['python', 'urllc', 'effective capacity', 'energy efficiency',
                  'finite blocklength', 'fading'],
        classifiers= [
            "Development Status :: 3 - Alpha",
            "Intended Audience :: Science/Research",
            "Programming Language :: Python :: 3",
            "Operating System :: OS Independent",
        ]
)
