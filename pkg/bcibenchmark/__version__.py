__version__ = '0.0.0'    # rewritten by poetry-dynamic-versioning when the package is built
