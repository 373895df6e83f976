"""Tests package for bpsprimes."""
