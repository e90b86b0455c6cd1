"""LSA Toolkit source package."""
