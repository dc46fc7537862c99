# Copyright 2026 The fieldroad Authors. All Rights Reserved.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
# ==============================================================================
"""fieldroad is a finite-volume simulator for the field-road diffusion model.

It advances the backward-Euler two-point-flux scheme on a coupled
field/road mesh, audits mass, positivity and entropy dissipation at every
step, and measures the exponential decay rate towards the steady state.
"""

from setuptools import find_packages
from setuptools import setup

project_name = 'fieldroad'
version = '0.1.0.dev0'

DOCLINES = __doc__.split('\n')

REQUIRED_PKGS = [
    'absl-py',
    'jinja2',
    'numpy',
    'pyyaml',
    'scipy',
]

# https://setuptools.readthedocs.io/en/latest/setuptools.html#new-and-changed-setup-keywords
setup(
    name=project_name,
    version=version,
    description=DOCLINES[0],
    long_description='\n'.join(DOCLINES[2:]),
    author='The fieldroad Authors',
    license='Apache 2.0',
    packages=find_packages('tools'),
    package_dir={'': 'tools'},
    package_data={'fieldroad': ['templates/*.jinja']},
    scripts=[],
    install_requires=REQUIRED_PKGS,
    python_requires='>=3.8',
    entry_points={
        'console_scripts': ['fieldroad = fieldroad.cli:run_main'],
    },
    classifiers=[
        'Development Status :: 4 - Beta',
        'Intended Audience :: Science/Research',
        'License :: OSI Approved :: Apache Software License',
        'Topic :: Scientific/Engineering :: Mathematics',
    ],
    keywords='finite volume entropy dissipation field road diffusion',
    include_package_data=True,
)
