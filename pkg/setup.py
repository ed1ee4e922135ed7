#!/usr/bin/env python3
"""
Setup script for Projection Lab
"""

from setuptools import setup, find_packages
import os

def get_version():
    with open(os.path.join('projection_lab', '__init__.py'), 'r') as f:
        for line in f:
            if line.startswith('__version__'):
                return line.split('=')[1].strip().strip('"\'')
    return '1.0.0'

def get_long_description():
    with open('README.md', 'r', encoding='utf-8') as f:
        return f.read()

def get_requirements():
    req_path = os.path.join(os.path.dirname(__file__), 'requirements.txt')
    with open(req_path, 'r') as f:
        return [line.strip() for line in f if line.strip() and not line.startswith('#')]

def get_dev_requirements():
    return ['pytest>=7.0']

setup(
    name='projection-lab',
    version=get_version(),
    author='Projection Lab Team',
    description='Dimension lower bounds for k-parameter families of orthogonal projections',
    long_description=get_long_description(),
    long_description_content_type='text/markdown',
    packages=find_packages(exclude=['tests']),
    classifiers=[
        'Development Status :: 4 - Beta',
        'Intended Audience :: Science/Research',
        'Topic :: Scientific/Engineering :: Mathematics',
        'License :: OSI Approved :: MIT License',
        'Programming Language :: Python :: 3',
        'Programming Language :: Python :: 3.9',
        'Programming Language :: Python :: 3.10',
        'Programming Language :: Python :: 3.11',
        'Programming Language :: Python :: 3.12',
        'Operating System :: OS Independent',
        'Environment :: Console',
    ],
    python_requires='>=3.9',
    install_requires=get_requirements(),
    extras_require={
        'dev': get_dev_requirements(),
    },
    entry_points={
        'console_scripts': [
            'projection-lab=projection_lab.cli.main:main',
            'projection-bound=projection_lab.cli.bound:main',
            'projection-check-family=projection_lab.cli.check_family:main',
            'projection-witness=projection_lab.cli.witness:main',
            'projection-transversality=projection_lab.cli.transversality:main',
            'projection-project=projection_lab.cli.project:main',
            'projection-sharpness=projection_lab.cli.sharpness:main',
            'projection-verify=projection_lab.cli.verify:main',
        ],
    },
    include_package_data=True,
    zip_safe=False,
    keywords='hausdorff dimension projections grassmannian fractal measures',
)
