from setuptools import setup, find_packages

setup(name="mcrard",
      version="0.1.0",
      description="Sparse robust linear regression: maximum correntropy" + \
                  " regression with automatic relevance determination" + \
                  " (MCR-ARD), its least-squares baseline (LSR-ARD) and" + \
                  " the synthetic corruption benchmark.",
      license="Apache License Version 2.0, January 2004",
      packages=find_packages(exclude=["tests"]),
      install_requires=[
            "numpy>=1.17",
            "scipy",
            "pandas>=1.0",
            "scikit-learn",
            "pyyaml",
            "tqdm",
      ],
      extras_require={
            "test": ["pytest"],
      },
      entry_points={
            "console_scripts": ["mcrard = mcrard.cli:main"],
      },
      classifiers=[
          "Development Status :: 3 - Alpha",
          "Intended Audience :: Science/Research",
          "Topic :: Scientific/Engineering :: Mathematics",
          "Programming Language :: Python :: 3",
      ],
      keywords=["sparse bayesian learning", "automatic relevance determination",
                "correntropy", "robust regression", "variational inference",
                "eeg decoding"],
      )
