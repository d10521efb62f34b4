"""diskop: эквивариантные операды малых дисков с оснащением."""

__version__ = "0.1.0"
