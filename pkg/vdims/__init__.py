# Virtual knot finite type dimension tables
__version__ = "1.0.0"
