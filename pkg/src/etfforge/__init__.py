"""etfforge: build, detect, solve, and certify d x 2d equiangular tight frames."""

__version__ = "0.1.0"
