import os
from setuptools import setup

version_file = os.path.abspath(os.path.join("ridgerecover", "VERSION"))

with open(version_file) as f:
    version = f.readlines()[0].strip()


setup(
    name='python-ridgerecover',
    version=version,
    license='MIT',
    description='Recovery of ridge functions from point samples, with lower-bound experiments.',
    packages=['ridgerecover'],
    package_data={'ridgerecover': ['VERSION']},
    include_package_data=True,

    python_requires=">=3.7",

    install_requires=[
        'click',
        'jsonschema',
        'cachetools',
        'numpy',
        'scipy',
    ],

    extras_require={
        'test': [
            'pytest>=5.0',
            'pytest-cov',
        ]
    },
    entry_points='''
        [console_scripts]
        ridgerecover=ridgerecover.cli:main
    ''',
    classifiers=[
        'Development Status :: 4 - Beta',
        'Intended Audience :: Science/Research',
        'License :: OSI Approved :: MIT License',
        'Operating System :: OS Independent',
        'Programming Language :: Python',
        "Programming Language :: Python :: 3",
        "Programming Language :: Python :: 3.7",
        "Programming Language :: Python :: 3.8",
        'Topic :: Scientific/Engineering :: Mathematics',
    ],
)
