"""Bulk-edge correspondence laboratory for matrix Hill operators."""
__version__ = "0.1.0"
