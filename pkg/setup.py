from setuptools import setup

with open("README.md", "r", encoding="utf-8") as fh:
    long_description = fh.read()

setup(
    name="hypercross",
    version="0.1.0",
    description="Квазиинтерполяционные операторы и алгоритм Смоляка для периодических функций",
    long_description=long_description,
    long_description_content_type="text/markdown",
    python_requires=">=3.11",
    py_modules=[
        "fourier_core",
        "kernels",
        "operators",
        "smolyak",
        "spaces",
        "testbed",
        "config",
        "hypercross_cli",
    ],
    install_requires=[
        "numpy>=1.24.0",
        "scipy>=1.10.0",
        "typing_extensions>=4.0.0",
    ],
    extras_require={"test": ["pytest>=7.0.0"]},
    entry_points={"console_scripts": ["hypercross = hypercross_cli:main"]},
)
