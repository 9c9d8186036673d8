from setuptools import find_packages, setup

setup(
    name="socialmuse",
    version="0.1.0",
    description="Explainable peer recommendations for networked ideation, with a desk-scale agent simulator",
    packages=find_packages(include=["socialmuse*"]),
    package_data={"socialmuse.semantics": ["assets/*.txt"]},
    python_requires=">=3.9",
    setup_requires=["setuptools>=62.3.0"],
    install_requires=[
        "numpy",
        "scipy",
        "networkx",
        "POT",
        "scikit-learn>=1.2",
        "joblib",
        "pandas",
        "nltk",
        "tyro",
        "dacite",
        "tqdm",
        "matplotlib",
        "tensorboard",
        "torch",
        "wandb",
    ],
    extras_require={"dev": ["pytest"]},
    entry_points={"console_scripts": ["socialmuse=socialmuse.cli:main"]},
)
