"""Open spin-1/2 XXZ/XXX chains with general integrable boundaries."""
__version__ = "0.1.0"
