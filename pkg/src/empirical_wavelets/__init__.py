"""Main package file for empirical wavelets."""
