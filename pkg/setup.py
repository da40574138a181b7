import os
import re
from setuptools import setup, find_packages

HERE = os.path.abspath(os.path.dirname(__file__))


def read(*parts):
    with open(os.path.join(HERE, *parts), encoding='utf-8') as stream:
        return stream.read()


def find_version():
    match = re.search(r"^__version__ = ['\"]([^'\"]*)['\"]", read('tempseg', 'version.py'), re.M)
    if not match:
        raise RuntimeError('No version string in tempseg/version.py')
    return match.group(1)


setup(
    name='tempseg',
    version=find_version(),
    description='Temporal consistency for the per-frame semantic segmentation of videos: '
                'image buffer and attention fusion, synthetic sequences and consistency metrics',
    long_description=read('README.md'),
    long_description_content_type='text/markdown',
    packages=find_packages(exclude=['tests']),
    entry_points={'console_scripts': ['tempseg = tempseg.cli:tempseg']},
    tests_require=['pytest'],
    install_requires=['numpy>=1.17', 'pyyaml'],
    extras_require={'dev': ['pytest>=3.6', 'pytest-cov', 'flake8']},
    python_requires='>=3.6',
    license='MIT',
    classifiers=['Development Status :: 3 - Alpha',
                 'License :: OSI Approved :: MIT License',
                 'Environment :: Console',
                 'Intended Audience :: Science/Research',
                 'Topic :: Scientific/Engineering :: Image Recognition',
                 'Programming Language :: Python :: 3 :: Only',
                 'Programming Language :: Python :: 3.6',
                 'Programming Language :: Python :: 3.7',
                 'Programming Language :: Python :: 3.8']
)
