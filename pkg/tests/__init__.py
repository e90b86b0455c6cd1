"""Test suite for LSA Toolkit."""
